"""
Utility modules for the nested-resonator toolkit.

Includes:
- config: Environment settings, logging setup and ConfigurationError
"""
