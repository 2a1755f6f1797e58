"""Optimization module - Caching of converted road maps"""
