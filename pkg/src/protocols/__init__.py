# Per-node update rules.
