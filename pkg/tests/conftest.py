import hypothesis

hypothesis.settings.register_profile(
    "schemascore", deadline=None, max_examples=120, derandomize=True
)
hypothesis.settings.load_profile("schemascore")
