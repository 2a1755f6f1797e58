"""CommonRoad module - Scenario model, builder, XML writer/reader and SVG rendering"""
