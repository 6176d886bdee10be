"""Scenario builders and the Monte Carlo SER engine."""
