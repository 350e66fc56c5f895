"""
Command-line verbs: validate, run, compare, version.
"""
