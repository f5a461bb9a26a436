"""Test package for MLOps modules"""
