# Malicious-node behaviour and threat scopes.
