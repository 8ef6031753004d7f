# Utility modules for majority lab
