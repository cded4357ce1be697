import os

from hypothesis import HealthCheck, settings

# Property tests exercise numerical kernels whose per-example cost varies a
# lot; the wall-clock deadline is the wrong failure signal for them.
settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=(HealthCheck.too_slow,),
)
settings.register_profile("quick", settings.get_profile("default"), max_examples=15)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))
