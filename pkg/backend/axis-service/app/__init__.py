"""
Axis Service application
"""
