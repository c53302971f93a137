"""
Certificates Feature
Canonical encoding, assembly and client verification
"""
