"""
Ingestion tests package.
"""
