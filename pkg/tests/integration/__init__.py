# Integration tests for API endpoints and services
