"""OpenSCENARIO module - Storyboard model, parameter resolution, parsing and validation"""
