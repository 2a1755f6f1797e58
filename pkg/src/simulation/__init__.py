"""Simulation module - Deterministic fixed-step storyboard execution"""
