"""Low-energy Trotter error toolkit."""
