"""Coherent-amplitude model of the passive transmitter.

Two phase-randomized pulses at w1 interfere on a 50:50 beamsplitter; the
bright port is split again and each half is up-converted (sum-frequency
generation at complete conversion) with its own pump pulse at w2. One
branch is rotated from +45 to -45 degrees and both are recombined on a
PBS in the +/-45 basis, so the relative pump phase sets the output
polarization. A final tap beamsplitter of transmittance ``t`` sends the
weak part to Bob and keeps the bright part for Alice's classical
intensity and polarization monitor.

Because every element is linear in the field (SFG becomes linear once the
pump is classical), coherent states stay coherent and it is enough to
track one complex amplitude per (mode, polarization).
"""

import cmath
import math
from dataclasses import dataclass

from .errors import DomainError

POLARIZATIONS = ("+45", "-45", "H", "V", "L", "R")


@dataclass(frozen=True)
class SourceConfig:
    """Transmitter parameters.

    mu : mean photon number scale of the input pulses
    t : transmittance of the final tap beamsplitter
    lambda_threshold : classical intensity threshold on the monitor port (photons)
    omega : half-width reduction of the polarization acceptance arcs (radians)
    """

    mu: float
    t: float
    lambda_threshold: float
    omega: float

    def __post_init__(self):
        problems = self.violations()
        if problems:
            raise DomainError("; ".join(problems))

    def violations(self):
        out = []
        if not (self.mu > 0 and math.isfinite(self.mu)):
            out.append(f"mu must be > 0 (got {self.mu})")
        if not (0.0 < self.t < 1.0):
            out.append(f"t must lie in (0, 1) (got {self.t})")
        if not (0.0 <= self.omega <= math.pi / 4):
            out.append(f"omega must lie in [0, pi/4] (got {self.omega})")
        if not out:
            upper = 4.0 * self.mu * (1.0 - self.t)
            if not (0.0 < self.lambda_threshold < upper):
                out.append(
                    f"lambda_threshold must lie in (0, 4 mu (1 - t)) = (0, {upper:.6g}) "
                    f"(got {self.lambda_threshold})"
                )
        return out

    @property
    def mu_t(self):
        return self.mu * self.t

    @property
    def theta_lambda(self):
        return theta_lambda(self)

    @classmethod
    def from_mu_t(cls, mu_t, omega, theta_lambda=math.pi / 2, t=0.01):
        """Build a config from the product mu*t and a threshold angle.

        Only ``mu * t`` enters Bob's statistics; ``t`` just fixes the split.
        """
        mu = mu_t / t
        lam = 2.0 * mu * (1.0 - t) * (1.0 + math.cos(theta_lambda))
        return cls(mu=mu, t=t, lambda_threshold=lam, omega=omega)


@dataclass(frozen=True)
class CoherentAmplitude:
    amplitude: complex
    polarization: str | None
    mode: str

    @property
    def intensity(self):
        return abs(self.amplitude) ** 2


def zeta(theta, mu):
    """Intensity 2 mu (1 + cos theta) of the recombined pulse before the tap."""
    if not mu > 0:
        raise DomainError(f"mu must be > 0 (got {mu})")
    return 2.0 * mu * (1.0 + math.cos(theta))


def gamma(theta, cfg):
    """Mean photon number t * zeta(theta) of the pulse sent to Bob."""
    return cfg.t * zeta(theta, cfg.mu)


def theta_lambda(cfg):
    """Phase angle where the monitored intensity (1 - t) zeta crosses the threshold."""
    scale = 2.0 * cfg.mu * (1.0 - cfg.t)
    ratio = cfg.lambda_threshold / scale - 1.0
    if not (-1.0 < ratio < 1.0):
        raise DomainError(
            f"lambda_threshold={cfg.lambda_threshold} outside (0, 4 mu (1 - t)) = (0, {2 * scale:.6g})"
        )
    return math.acos(ratio)


def beamsplitter(a, b, transmittance=0.5):
    """Lossless beamsplitter acting on input amplitudes ``a`` and ``b``.

    Outputs ``(sqrt(T) a + sqrt(1-T) b, sqrt(1-T) a - sqrt(T) b)``; at T=1/2
    this is the ``(a+b)/sqrt2, (a-b)/sqrt2`` convention.
    """
    ta = math.sqrt(transmittance)
    ra = math.sqrt(1.0 - transmittance)
    return ta * a + ra * b, ra * a - ta * b


def sfg_mode_map(signal_w1, idler_w3, pump_phase, coupling_time):
    """Coupled-mode evolution of an (w1, w3) amplitude pair under a classical pump.

    ``coupling_time`` is the dimensionless product chi * sqrt(pump intensity) * t.
    The creation operators evolve as
        c1^+(s) = c1^+ cos s - e^{i theta3} c2^+ sin s
        c2^+(s) = c2^+ cos s + e^{-i theta3} c1^+ sin s
    and a coherent excitation ``alpha c1^+ + beta c2^+`` is re-expanded on them.
    """
    c, s = math.cos(coupling_time), math.sin(coupling_time)
    ph = cmath.exp(1j * pump_phase)
    out_w1 = signal_w1 * c + idler_w3 * s / ph
    out_w3 = -signal_w1 * ph * s + idler_w3 * c
    return out_w1, out_w3


def sfg_complete_conversion(signal, pump_phase, pump_sqrt_intensity=1.0, chi=1.0):
    """Up-convert a w1 coherent amplitude at the complete-conversion time.

    At t_c = pi / (2 sqrt(mu) chi) the w1 field is emptied into w3 with the
    factor -exp(i pump_phase); the optical filter drops any w1 residue.
    """
    if pump_sqrt_intensity <= 0 or chi <= 0:
        raise DomainError("pump amplitude and coupling must be positive")
    t_c = math.pi / (2.0 * pump_sqrt_intensity * chi)
    _, w3 = sfg_mode_map(signal.amplitude, 0j, pump_phase, pump_sqrt_intensity * chi * t_c)
    return CoherentAmplitude(w3, signal.polarization, signal.mode + "@w3")


def propagate_pure_network(theta1, theta2, theta3, theta4, mu, t):
    """Push pure coherent inputs with phases theta1..theta4 through the network.

    Returns ``(c3, d3, psi, phi)``: the amplitudes sent to Bob (``c3``) and to
    the monitor (``d3``), the polarization angle psi of the output and its
    global phase phi, both in [0, 2 pi).
    """
    if not mu > 0 or not 0.0 < t < 1.0:
        raise DomainError("need mu > 0 and 0 < t < 1")
    a0 = math.sqrt(2.0 * mu) * cmath.exp(1j * theta1)
    b0 = math.sqrt(2.0 * mu) * cmath.exp(1j * theta2)
    a1, _b1 = beamsplitter(a0, b0)
    c1, d1 = beamsplitter(a1, 0j)
    pump = math.sqrt(mu)
    c2 = sfg_complete_conversion(CoherentAmplitude(c1, "+45", "c1"), theta3, pump)
    d2 = sfg_complete_conversion(CoherentAmplitude(d1, "+45", "d1"), theta4, pump)
    d2 = CoherentAmplitude(d2.amplitude, "-45", "d2")  # rotator R
    # PBS in the +/-45 basis: c2 leaves on its +45 component, d2 on -45
    a3 = {"+45": c2.amplitude, "-45": d2.amplitude}
    total = math.sqrt(abs(a3["+45"]) ** 2 + abs(a3["-45"]) ** 2)
    if total == 0.0:
        psi = phi = 0.0
    else:
        phi = cmath.phase(a3["+45"]) % (2 * math.pi)
        psi = (cmath.phase(a3["-45"]) - cmath.phase(a3["+45"])) % (2 * math.pi)
    amp = total * cmath.exp(1j * phi)
    c3, d3 = beamsplitter(amp, 0j, t)
    return (
        CoherentAmplitude(c3, None, "c3"),
        CoherentAmplitude(d3, None, "d3"),
        psi,
        phi,
    )


def closed_form_output(theta1, theta2, theta3, theta4, mu, t):
    """Final c3/d3 amplitudes and (psi, phi) written directly from the algebra."""
    theta = theta2 - theta1
    z = zeta(theta, mu)
    phi = (math.pi + theta1 + theta3 + cmath.phase(1 + cmath.exp(1j * theta))) % (2 * math.pi)
    psi = (theta4 - theta3) % (2 * math.pi)
    e = cmath.exp(1j * phi)
    return math.sqrt(t * z) * e, math.sqrt((1 - t) * z) * e, psi, phi
