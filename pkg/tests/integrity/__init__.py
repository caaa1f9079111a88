"""Integrity tests"""
