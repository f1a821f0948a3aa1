"""Test package for the CLI tool.""" 