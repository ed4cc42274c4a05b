"""
Schemas package initialization
"""
