"""
Test suite for the square-root diffusion laboratory
"""
