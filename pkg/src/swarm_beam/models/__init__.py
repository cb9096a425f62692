"""Configuration models for swarm-beam."""
