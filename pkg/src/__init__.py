"""osc2cr - OpenSCENARIO to CommonRoad converter"""
__version__ = "1.0.0"
