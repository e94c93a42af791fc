"""Scenario files, seeded generators, verification suites and the CLI."""
