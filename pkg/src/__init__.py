"""
CLOSP Retrieval Source Package
"""
