"""Subband adaptive echo-cancellation simulator.

A reference signal and its echo through an unknown system are split into
complex subbands by the warped analysis bank, each band is decimated and
adapted independently with complex NLMS, and the subband errors are
recombined by the synthesis bank.  Echo-return-loss enhancement (ERLE) is
traced over time against the identically synthesized desired signal so
that both share the cascade's path delay.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .analysis_design import default_coloring_filter, SourceModel
from .warpcore import BankSpec, PrototypeFilter, _coeff_array


@dataclass
class SimConfig:
    """Configuration of one echo-cancellation run."""

    spec: BankSpec
    h: object                     # analysis prototype (PrototypeFilter or array)
    g: object                     # synthesis prototype
    sample_rate: int = 16000
    duration: float = 10.0
    adapt_start: float = 1.0      # seconds before adaptation begins
    fullband_taps: int = 256      # total adaptive length budget; per band 256/D_i
    step_size: float = 0.5
    nlms_eps: float = 1e-6        # relative to the band input-power estimate
    seed: int = 0
    signal_kind: str = "white"    # white | colored | speech_like | file
    signal_params: dict = field(default_factory=dict)
    unknown_system_length: int = 200

    def __post_init__(self):
        for Di in self.spec.D:
            if self.fullband_taps % Di != 0:
                raise ValueError(
                    "fullband tap budget %d is not divisible by decimation factor %d"
                    % (self.fullband_taps, Di))


@dataclass
class ErleTrace:
    """Windowed ERLE time series, normalized to 0 dB over the first second."""

    time: np.ndarray
    erle_db: np.ndarray
    steady_state_db: float
    diverged: bool


def generate_signal(kind, seed, length, params=None):
    """Reference-signal generator; `seed` may be an int or a Generator.

    white      -- unit-variance Gaussian noise
    colored    -- white noise through the default order-5 lowpass FIR
    speech_like-- white noise shaped to a synthetic speech-weighted spectrum
    file       -- raw float64 little-endian samples from params['path']
    """
    params = params or {}
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if kind == "white":
        return rng.standard_normal(length)
    if kind == "colored":
        return lfilter(default_coloring_filter(), [1.0], rng.standard_normal(length))
    if kind == "speech_like":
        return lfilter(speech_shaping_filter(
            params.get("corner_hz", 500.0),
            params.get("sample_rate", 16000)), [1.0], rng.standard_normal(length))
    if kind == "file":
        data = np.fromfile(params["path"], dtype="<f8")
        if data.size < length:
            raise ValueError("signal file shorter than requested length")
        return data[:length]
    raise ValueError("unknown signal kind %r" % (kind,))


def speech_shaping_filter(corner_hz=500.0, sample_rate=16000, taps=257):
    """FIR whose squared response follows the synthetic speech-weighted PSD."""
    from scipy.signal import firwin2
    model = SourceModel.speech_like(corner_hz, sample_rate, n=1024)
    half = model.omega >= 0
    freqs = model.omega[half] / np.pi
    amps = np.sqrt(model.pxx[half])
    freqs = np.concatenate([[0.0], freqs, [1.0]])
    amps = np.concatenate([[amps[0]], amps, [amps[-1]]])
    b = firwin2(taps, freqs, amps)
    return b / np.sqrt(np.sum(b ** 2))


def generate_unknown_system(seed, length=200):
    """Seeded Gaussian unknown-system impulse response."""
    if length < 1:
        raise ValueError("impulse-response length must be positive")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return rng.standard_normal(length)


def analysis_bank(spec, x, h):
    """All M complex subband signals of x at full rate, shape (M, len(x))."""
    hc = _coeff_array(h, spec.M)
    M = spec.M
    chain = np.empty((M, len(x)))
    s = np.asarray(x, dtype=float)
    chain[0] = s
    for n in range(1, M):
        s = lfilter([-spec.mu, 1.0], [1.0, -spec.mu], s)
        chain[n] = s
    return np.fft.fft(hc[:, None] * chain, axis=0)


def synthesis_bank(spec, E, g, real=True):
    """Recombine full-rate subband signals E (M, T) through the synthesis bank."""
    gc = _coeff_array(g, spec.M)
    M = spec.M
    V = M * np.fft.ifft(np.asarray(E), axis=0)  # v_n = sum_i E_i W^(-ni)
    acc = gc[0] * V[0]
    for n in range(1, M):
        acc = lfilter([-spec.mu, 1.0], [1.0, -spec.mu], acc) + gc[n] * V[n]
    return np.real(acc) if real else acc


def nlms_band(xb, db, taps, step, eps_rel, adapt_from):
    """Complex NLMS error sequence for one decimated band.

    Weights start at zero and are frozen until sample index `adapt_from`;
    the regularizer is eps_rel times the band's input-power estimate.
    """
    T = len(xb)
    w = np.zeros(taps, dtype=complex)
    e = np.zeros(T, dtype=complex)
    buf = np.zeros(taps, dtype=complex)
    pav = np.mean(np.abs(xb) ** 2) * taps
    eps = eps_rel * max(pav, 1e-12)
    for m in range(T):
        buf[1:] = buf[:-1]
        buf[0] = xb[m]
        err = db[m] - np.vdot(w, buf)
        e[m] = err
        if m >= adapt_from:
            nrm = np.real(np.vdot(buf, buf))
            w += (step / (eps + nrm)) * buf * np.conj(err)
            if not np.isfinite(nrm):  # safeguard against runaway updates
                break
    return e


def run_simulation(cfg):
    """Run the full subband echo canceller and return its ErleTrace."""
    spec = cfg.spec
    fs = cfg.sample_rate
    T = int(cfg.duration * fs)
    rng = np.random.default_rng(cfg.seed)
    x = generate_signal(cfg.signal_kind, rng, T, cfg.signal_params)
    s = generate_unknown_system(rng, cfg.unknown_system_length)
    d = lfilter(s, [1.0], x)

    X = analysis_bank(spec, x, cfg.h)
    Dd = analysis_bank(spec, d, cfg.h)
    E = np.zeros((spec.M, T), dtype=complex)
    Dsyn = np.zeros((spec.M, T), dtype=complex)
    for i in range(spec.M):
        Di = spec.D[i]
        xb = X[i, ::Di]
        db = Dd[i, ::Di]
        taps = cfg.fullband_taps // Di
        adapt_from = int(cfg.adapt_start * fs / Di)
        E[i, ::Di] = nlms_band(xb, db, taps, cfg.step_size, cfg.nlms_eps, adapt_from)
        Dsyn[i, ::Di] = db
    es = synthesis_bank(spec, E, cfg.g)
    ds = synthesis_bank(spec, Dsyn, cfg.g)

    wlen = int(0.05 * fs)
    hop = int(0.025 * fs)
    times, erle, ratios = [], [], []
    for start in range(0, T - wlen, hop):
        pd = np.mean(ds[start:start + wlen] ** 2)
        pe = np.mean(es[start:start + wlen] ** 2)
        times.append((start + wlen / 2) / fs)
        erle.append(10.0 * np.log10(pd / max(pe, 1e-300)))
        ratios.append(pe / max(pd, 1e-300))
    times = np.array(times)
    erle = np.array(erle)
    erle -= np.mean(erle[times < cfg.adapt_start])
    steady = float(np.mean(erle[int(len(erle) * 0.8):]))
    post = times >= cfg.adapt_start
    diverged = bool(np.any(np.array(ratios)[post] > 10.0))
    return ErleTrace(time=times, erle_db=erle, steady_state_db=steady, diverged=diverged)


@dataclass
class DesignBundle:
    """Named analysis/synthesis prototype pair for comparison runs."""

    name: str
    spec: BankSpec
    h: object
    g: object


def compare_designs(cfg, designs):
    """Run several designs through identical signals and align their traces.

    `cfg` provides the shared simulation settings (its h/g are ignored);
    every design must use the same BankSpec.  Returns a report dict with
    per-design traces, steady-state values, and pairwise deltas.
    """
    if len(designs) < 2:
        raise ValueError("need at least two designs to compare")
    for dsn in designs:
        if dsn.spec != cfg.spec:
            raise ValueError("design %r uses a different bank configuration" % dsn.name)
    traces = {}
    steady = {}
    for dsn in designs:
        run_cfg = SimConfig(
            spec=cfg.spec, h=dsn.h, g=dsn.g,
            sample_rate=cfg.sample_rate, duration=cfg.duration,
            adapt_start=cfg.adapt_start, fullband_taps=cfg.fullband_taps,
            step_size=cfg.step_size, nlms_eps=cfg.nlms_eps, seed=cfg.seed,
            signal_kind=cfg.signal_kind, signal_params=cfg.signal_params,
            unknown_system_length=cfg.unknown_system_length)
        tr = run_simulation(run_cfg)
        traces[dsn.name] = tr
        steady[dsn.name] = tr.steady_state_db
    names = [d.name for d in designs]
    deltas = {"%s-%s" % (a, b): steady[a] - steady[b]
              for ai, a in enumerate(names) for b in names[ai + 1:]}
    return {"designs": names, "steady_state_db": steady, "deltas": deltas,
            "traces": traces}
