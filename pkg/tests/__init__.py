"""
Test suite for the nested-resonator toolkit.
"""
