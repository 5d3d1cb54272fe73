#!/usr/bin/env python3
"""
Curb CLI launcher
"""
import os
import sys

# Repository root on the path so the src package resolves
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src.cli import cli

if __name__ == '__main__':
    cli(obj={})
