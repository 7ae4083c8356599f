"""
spinham - Source Package
"""
