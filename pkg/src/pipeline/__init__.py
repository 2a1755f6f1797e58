"""Pipeline module - End-to-end conversion and batch orchestration"""
