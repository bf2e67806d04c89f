"""
Test package for clustrec.
"""
