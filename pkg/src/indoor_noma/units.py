"""dB / milliwatt conversions used across the link budget code."""

import numpy as np


def db_to_linear(db):
    return np.power(10.0, np.asarray(db, dtype=float) / 10.0)


def linear_to_db(lin):
    return 10.0 * np.log10(lin)


def dbm_to_mw(dbm):
    return db_to_linear(dbm)


def mw_to_dbm(mw):
    return linear_to_db(mw)


def noise_power_dbm(density_dbm_hz: float, bandwidth_hz: float) -> float:
    """Total noise power over a band given a flat power spectral density."""
    return float(density_dbm_hz + 10.0 * np.log10(bandwidth_hz))
