"""Experiment runners and artifact writers behind the command-line subcommands."""
