"""Pinned reference values of the target ratio at the true parameters.

Each entry was produced once by the brute-force oracle
(``iuq oracle --model NAME --budget 10000000 --seed 2024``) and is stored
with its Monte Carlo standard error; coverage experiments judge intervals
against these values.  Regenerate with the same command after changing a
testbed's configuration.
"""

REFERENCE_ETA = {
    # model: (eta, monte-carlo se, oracle budget, oracle seed)
    "san": (4.483144941946107, 0.0017150829274445157, 10_000_000, 2024),
    "mm1": (0.5000286599502668, 0.00031468839428403406, 10_000_000, 2024),
    "erm": (284.40553135559986, 0.0036241890807677092, 10_000_000, 2024),
}


def reference_eta(model_name):
    """Pinned eta(theta_true) for a named testbed."""
    try:
        return REFERENCE_ETA[model_name][0]
    except KeyError:
        raise KeyError(f"no pinned reference value for model {model_name!r}") from None
