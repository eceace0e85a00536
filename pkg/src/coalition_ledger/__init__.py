"""Fair payoff allocation for collaborative model training."""
