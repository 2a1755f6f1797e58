"""OpenDRIVE module - Road parsing, reference-line geometry and lanelet conversion"""
