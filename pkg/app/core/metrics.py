from prometheus_client import Counter, Histogram

# Derivation metrics
RULE_APPLICATIONS_TOTAL = Counter(
    "idl_rule_applications_total",
    "Total rewrite rule applications",
    ["rule"],
)

DERIVATION_OUTCOMES_TOTAL = Counter(
    "idl_derivation_outcomes_total",
    "Total derivation outcomes",
    ["outcome"],
)

DERIVATION_DURATION_SECONDS = Histogram(
    "idl_derivation_duration_seconds",
    "Derivation duration in seconds",
)

LABELINGS_TOTAL = Counter(
    "idl_labelings_total",
    "Total ground labelings produced from constraint stores",
)

# Verifier metrics
VERIFIER_CHECKS_TOTAL = Counter(
    "idl_verifier_checks_total",
    "Total answer checks run by the ground verifier",
    ["result"],
)
