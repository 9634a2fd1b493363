import hypothesis

# Property tests must be reproducible run-to-run (the suite asserts
# determinism elsewhere); numerical kernels have no deadline-relevant
# per-example cost spikes beyond the first numpy warm-up.
hypothesis.settings.register_profile(
    "fslbm",
    deadline=None,
    derandomize=True,
    suppress_health_check=[hypothesis.HealthCheck.too_slow],
)
hypothesis.settings.load_profile("fslbm")
