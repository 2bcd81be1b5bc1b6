"""
Command-line interface for the nested-resonator toolkit.

Provides:
- Terminal display functions
- Command implementations and output writers
- The invariant self-test suite
"""
