"""Testing module for qclt"""
