"""Channel scenarios: sampling, uncertainty radii and JSON files.

All noise variances are 1, so ``power`` is the transmit SNR budget in
linear units.

JSON layout (complex numbers are ``[re, im]`` pairs, matrices are row-major
nested lists)::

    ChannelInstance
    {"n_t": 4,
     "h": [[re, im], ...],                   # length n_t
     "eves": [[[[re, im], ...], ...], ...],  # K matrices, n_t rows each
     "power_db": 3.0,
     "power": 1.9952623149688795}            # optional, exact linear value

    UncertaintySpec
    {"h_bar": [...], "g_bars": [...], "eps_b": 0.1, "eps_e": [0.5, ...],
     "power_db": 20.0, "power": 100.0}

``save_instance`` writes both power fields so that a save/load round trip
is exact; hand-written files may give ``power_db`` alone.  When both are
present they must agree to 1e-9 relative.
"""

import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ChannelInstance",
    "UncertaintySpec",
    "InstanceParseError",
    "make_rng",
    "sample_channel",
    "db_to_linear",
    "linear_to_db",
    "uncertainty_from_ratios",
    "save_instance",
    "load_instance",
    "instance_to_dict",
    "instance_from_dict",
]


class InstanceParseError(ValueError):
    pass


def _check_eves(h, eves):
    n_t = h.shape[0]
    for k, G in enumerate(eves):
        if G.ndim != 2 or G.shape[0] != n_t:
            raise ValueError(f"eve {k}: expected {n_t} rows, got shape {G.shape}")


@dataclass(frozen=True, eq=False)
class ChannelInstance:
    h: np.ndarray
    eves: tuple
    power: float

    def __post_init__(self):
        h = np.asarray(self.h, dtype=complex).ravel()
        eves = tuple(np.atleast_2d(np.asarray(G, dtype=complex)) for G in self.eves)
        if h.size == 0:
            raise ValueError("h must be non-empty")
        _check_eves(h, eves)
        if not (np.isfinite(self.power) and self.power > 0):
            raise ValueError(f"power must be finite and positive, got {self.power}")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "eves", eves)
        object.__setattr__(self, "power", float(self.power))

    @property
    def n_t(self):
        return self.h.size

    @property
    def K(self):
        return len(self.eves)

    def with_power(self, power):
        return ChannelInstance(self.h, self.eves, power)

    def with_eves(self, eves):
        return ChannelInstance(self.h, eves, self.power)

    def __eq__(self, other):
        return (
            isinstance(other, ChannelInstance)
            and self.power == other.power
            and np.array_equal(self.h, other.h)
            and len(self.eves) == len(other.eves)
            and all(np.array_equal(a, b) for a, b in zip(self.eves, other.eves))
        )


@dataclass(frozen=True, eq=False)
class UncertaintySpec:
    h_bar: np.ndarray
    G_bars: tuple
    eps_b: float
    eps_e: tuple
    power: float

    def __post_init__(self):
        h = np.asarray(self.h_bar, dtype=complex).ravel()
        eves = tuple(np.atleast_2d(np.asarray(G, dtype=complex)) for G in self.G_bars)
        _check_eves(h, eves)
        eps_e = tuple(float(e) for e in np.atleast_1d(self.eps_e))
        if len(eps_e) != len(eves):
            raise ValueError(f"{len(eps_e)} Eve radii for {len(eves)} Eves")
        radii = (float(self.eps_b),) + eps_e
        if not all(np.isfinite(r) and r >= 0 for r in radii):
            raise ValueError("radii must be finite and nonnegative")
        if not (np.isfinite(self.power) and self.power > 0):
            raise ValueError(f"power must be finite and positive, got {self.power}")
        object.__setattr__(self, "h_bar", h)
        object.__setattr__(self, "G_bars", eves)
        object.__setattr__(self, "eps_b", float(self.eps_b))
        object.__setattr__(self, "eps_e", eps_e)
        object.__setattr__(self, "power", float(self.power))

    @property
    def n_t(self):
        return self.h_bar.size

    @property
    def K(self):
        return len(self.G_bars)

    def nominal(self):
        """The channel means as a perfect-CSI instance."""
        return ChannelInstance(self.h_bar, self.G_bars, self.power)

    def with_radii(self, eps_b, eps_e):
        return UncertaintySpec(self.h_bar, self.G_bars, eps_b, eps_e, self.power)

    def __eq__(self, other):
        return (
            isinstance(other, UncertaintySpec)
            and self.power == other.power
            and self.eps_b == other.eps_b
            and self.eps_e == other.eps_e
            and np.array_equal(self.h_bar, other.h_bar)
            and len(self.G_bars) == len(other.G_bars)
            and all(np.array_equal(a, b) for a, b in zip(self.G_bars, other.G_bars))
        )


def make_rng(seed, stream=0):
    """Independent generator for ``(seed, stream)``; same pair, same draws."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(int(stream),))))


def _cn(rng, shape, variance):
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def sample_channel(rng, n_t, eve_dims, rho_e_sq=1.0, power=1.0):
    """Draw i.i.d. circular Gaussian channels: Bob variance 1, Eves ``rho_e_sq``."""
    if n_t < 1:
        raise ValueError("n_t must be >= 1")
    if rho_e_sq <= 0:
        raise ValueError("rho_e_sq must be positive")
    h = _cn(rng, n_t, 1.0)
    eves = tuple(_cn(rng, (n_t, int(d)), rho_e_sq) for d in eve_dims)
    return ChannelInstance(h, eves, power)


def db_to_linear(p_db):
    return 10.0 ** (p_db / 10.0)


def linear_to_db(p):
    return 10.0 * np.log10(p)


def uncertainty_from_ratios(nominal, alpha_b, alpha_e, rho_e_sq=1.0):
    """Radii from uncertainty ratios using the ensemble channel energies.

    ``eps_b = alpha_b * sqrt(n_t)`` and
    ``eps_e[k] = alpha_e * sqrt(n_t * N_e[k] * rho_e_sq)``, the expected
    norms of the i.i.d. generator in :func:`sample_channel`.
    """
    if alpha_b < 0 or np.any(np.asarray(alpha_e) < 0):
        raise ValueError("uncertainty ratios must be nonnegative")
    n_t = nominal.n_t
    alpha_e = np.broadcast_to(np.asarray(alpha_e, dtype=float), (nominal.K,))
    eps_b = alpha_b * np.sqrt(n_t)
    eps_e = [a * np.sqrt(n_t * G.shape[1] * rho_e_sq) for a, G in zip(alpha_e, nominal.eves)]
    return UncertaintySpec(nominal.h, nominal.eves, eps_b, eps_e, nominal.power)


# -- JSON --------------------------------------------------------------------


def _enc_vec(v):
    return [[float(z.real), float(z.imag)] for z in v]


def _enc_mat(M):
    return [_enc_vec(row) for row in M]


def _dec_vec(obj, field):
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError):
        raise InstanceParseError(f"field {field!r}: expected a list of [re, im] pairs") from None
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InstanceParseError(f"field {field!r}: expected a list of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def _dec_mat(obj, field):
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError):
        raise InstanceParseError(f"field {field!r}: expected a row-major matrix of [re, im] pairs") from None
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise InstanceParseError(f"field {field!r}: expected a row-major matrix of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def _power_fields(p):
    return {"power_db": float(linear_to_db(p)), "power": p}


def _dec_float(d, key):
    try:
        value = float(d[key])
    except (TypeError, ValueError):
        raise InstanceParseError(f"field {key!r}: expected a number, got {d[key]!r}") from None
    if not np.isfinite(value):
        raise InstanceParseError(f"field {key!r}: must be finite")
    return value


def _dec_power(d):
    # "power" is the exact linear value written by save_instance; "power_db"
    # is what people write by hand.  When both are present they must agree.
    if "power_db" not in d and "power" not in d:
        raise InstanceParseError("missing field 'power_db'")
    from_db = db_to_linear(_dec_float(d, "power_db")) if "power_db" in d else None
    if "power" not in d:
        return float(from_db)
    p = _dec_float(d, "power")
    if from_db is not None and abs(p - from_db) > 1e-9 * abs(p):
        raise InstanceParseError(f"fields 'power' ({p}) and 'power_db' disagree")
    return p


def _check_rows(h, eves, field):
    for k, G in enumerate(eves):
        if G.shape[0] != h.size:
            raise InstanceParseError(f"field '{field}[{k}]': expected {h.size} rows, got {G.shape[0]}")


def instance_to_dict(obj):
    if isinstance(obj, ChannelInstance):
        return {"n_t": obj.n_t, "h": _enc_vec(obj.h), "eves": [_enc_mat(G) for G in obj.eves], **_power_fields(obj.power)}
    if isinstance(obj, UncertaintySpec):
        return {
            "n_t": obj.n_t,
            "h_bar": _enc_vec(obj.h_bar),
            "g_bars": [_enc_mat(G) for G in obj.G_bars],
            "eps_b": obj.eps_b,
            "eps_e": list(obj.eps_e),
            **_power_fields(obj.power),
        }
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def instance_from_dict(d):
    """Decode either JSON layout; the presence of ``h_bar`` selects the uncertainty layout."""
    if not isinstance(d, dict):
        raise InstanceParseError("top level must be a JSON object")
    try:
        if "h_bar" in d:
            for key in ("g_bars", "eps_b", "eps_e"):
                if key not in d:
                    raise InstanceParseError(f"missing field {key!r}")
            h = _dec_vec(d["h_bar"], "h_bar")
            eves = [_dec_mat(G, f"g_bars[{k}]") for k, G in enumerate(d["g_bars"])]
            _check_rows(h, eves, "g_bars")
            obj = UncertaintySpec(h, eves, float(d["eps_b"]), [float(e) for e in d["eps_e"]], _dec_power(d))
        else:
            for key in ("h", "eves"):
                if key not in d:
                    raise InstanceParseError(f"missing field {key!r}")
            h = _dec_vec(d["h"], "h")
            eves = [_dec_mat(G, f"eves[{k}]") for k, G in enumerate(d["eves"])]
            _check_rows(h, eves, "eves")
            obj = ChannelInstance(h, eves, _dec_power(d))
    except InstanceParseError:
        raise
    except (TypeError, ValueError) as exc:
        raise InstanceParseError(str(exc)) from None
    if "n_t" in d and int(d["n_t"]) != obj.n_t:
        raise InstanceParseError(f"field 'n_t': says {d['n_t']} but h has length {obj.n_t}")
    return obj


def save_instance(obj, path):
    d = instance_to_dict(obj)
    # one top-level field per line, values kept compact
    body = ",\n".join(f" {json.dumps(k)}: {json.dumps(v)}" for k, v in d.items())
    with open(path, "w") as fh:
        fh.write("{\n" + body + "\n}\n")


def load_instance(path):
    with open(path) as fh:
        text = fh.read()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        return instance_from_dict(d)
    except InstanceParseError as exc:
        raise InstanceParseError(f"{path}: {exc}") from None
