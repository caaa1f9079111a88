"""Package utilities"""
