"""Constraint sense tokens shared across modules (single source of truth)."""

LE = "<="
GE = ">="
EQ = "="
SENSES = (LE, GE, EQ)
