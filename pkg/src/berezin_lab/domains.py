"""Model pseudoconvex domains, Levi-form boundary classification, inflation.

Every catalog domain is a generalized complex ellipsoid

    E(q) = { z in C^n : |z_1|^{q_1} + ... + |z_n|^{q_n} < 1 },

with defining function rho(z) = sum_j |z_j|^{q_j} - 1.  The family is closed
under inflation: attaching p fiber coordinates with exponent 2p/r to E(q)
gives E(q_1,...,q_n, 2p/r,...,2p/r).  Ellipsoids are Reinhardt, so monomial
moments have closed forms (see ``quadrature``); arbitrary domains can be
plugged in through :class:`CustomDomain` at the cost of quadrature-based
orthogonalization downstream.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .errors import BoundaryError, DegenerateGradientError, ParameterError

BOUNDARY_TOL_COEFF = 1e-10   # |rho(p)| < coeff * (1 + |p|^2) counts as "on boundary"
STRONG_TOL_COEFF = 1e-8      # relative Levi-eigenvalue threshold for "strong"


class PointKind(enum.Enum):
    STRONGLY_PSEUDOCONVEX = "StronglyPseudoconvex"
    WEAKLY_PSEUDOCONVEX = "WeaklyPseudoconvex"


@dataclass(frozen=True)
class BoundaryClassification:
    point: np.ndarray
    kind: PointKind
    min_tangential_eigenvalue: float
    tolerance_used: float


class Domain:
    """A bounded domain with defining function, immutable after construction.

    Subclasses provide ``rho``, ``grad_rho`` (Wirtinger gradient d rho/d z_j)
    and ``hessian`` (the complex Hessian form).  ``exponents`` is the tuple of
    ellipsoid exponents when the domain belongs to the E(q) family, else None;
    its presence is what unlocks closed-form moments.
    """

    name = "domain"
    dim = 0
    reinhardt = False
    bounding_radius = 1.0
    exponents = None

    def rho(self, z):
        raise NotImplementedError

    def grad_rho(self, z):
        raise NotImplementedError

    def hessian(self, point, x, y):
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.name} dim={self.dim}>"


def _as_points(z, dim):
    z = np.asarray(z, dtype=np.complex128)
    single = z.ndim == 1
    if single:
        z = z[None, :]
    if z.shape[-1] != dim:
        raise ParameterError(f"expected points in C^{dim}, got shape {z.shape}")
    return z, single


class EllipsoidDomain(Domain):
    """Generalized complex ellipsoid E(q) with rho = sum |z_j|^{q_j} - 1."""

    def __init__(self, exponents, name=None):
        exponents = tuple(float(q) for q in exponents)
        if not exponents or any(q <= 0 for q in exponents):
            raise ParameterError(f"exponents must be positive, got {exponents}")
        self.exponents = exponents
        self.dim = len(exponents)
        self.name = name or "ellipsoid" + str(exponents)
        self.reinhardt = True
        # each |z_j| < 1 inside, so |z| < sqrt(n)
        self.bounding_radius = float(np.sqrt(self.dim))

    def rho(self, z):
        z, single = _as_points(z, self.dim)
        q = np.asarray(self.exponents)
        val = np.sum(np.abs(z) ** q, axis=-1) - 1.0
        return float(val[0]) if single else val

    def grad_rho(self, z):
        # d/dz_j |z_j|^q = (q/2) |z_j|^{q-2} conj(z_j)
        z, single = _as_points(z, self.dim)
        q = np.asarray(self.exponents)
        absz = np.abs(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            fac = np.where(absz > 0, absz ** (q - 2.0), np.where(q == 2.0, 1.0, 0.0))
        g = (q / 2.0) * fac * np.conj(z)
        return g[0] if single else g

    def hessian(self, point, x, y):
        # the complex Hessian of E(q) is diagonal: (q^2/4) |z_j|^{q-2}
        point = np.asarray(point, dtype=np.complex128)
        x = np.asarray(x, dtype=np.complex128)
        y = np.asarray(y, dtype=np.complex128)
        q = np.asarray(self.exponents)
        absz = np.abs(point)
        with np.errstate(divide="ignore", invalid="ignore"):
            fac = np.where(absz > 0, absz ** (q - 2.0), np.where(q == 2.0, 1.0, 0.0))
        diag = (q * q / 4.0) * fac
        return complex(np.sum(diag * x * np.conj(y)))

    def hessian_matrix(self, point):
        point = np.asarray(point, dtype=np.complex128)
        q = np.asarray(self.exponents)
        absz = np.abs(point)
        with np.errstate(divide="ignore", invalid="ignore"):
            fac = np.where(absz > 0, absz ** (q - 2.0), np.where(q == 2.0, 1.0, 0.0))
        return np.diag((q * q / 4.0) * fac).astype(np.complex128)


class CustomDomain(Domain):
    """Plug-in domain defined by user callables (no closed-form moments)."""

    def __init__(self, name, dim, rho, grad_rho, hessian,
                 reinhardt=False, bounding_radius=1.0):
        self.name = name
        self.dim = int(dim)
        self._rho = rho
        self._grad = grad_rho
        self._hess = hessian
        self.reinhardt = bool(reinhardt)
        self.bounding_radius = float(bounding_radius)

    def rho(self, z):
        return self._rho(np.asarray(z, dtype=np.complex128))

    def grad_rho(self, z):
        return np.asarray(self._grad(np.asarray(z, dtype=np.complex128)),
                          dtype=np.complex128)

    def hessian(self, point, x, y):
        return complex(self._hess(np.asarray(point, dtype=np.complex128),
                                  np.asarray(x, dtype=np.complex128),
                                  np.asarray(y, dtype=np.complex128)))


class InflatedDomain(Domain):
    """Hartogs-type inflation: base domain plus p fiber coordinates.

    rho(z, w) = rho_base(z) + sum_{j<=p} |w_j|^{2p/r}, requiring 0 < r <= p
    so the fiber exponent 2p/r is at least 2 and the composite boundary stays
    C^2 wherever the base is.
    """

    def __init__(self, base, p, r):
        p = int(p)
        if p < 1:
            raise ParameterError(f"fiber count p must be a positive integer, got {p}")
        r = float(r)
        if not 0.0 < r <= p:
            raise ParameterError(f"inflation requires 0 < r <= p, got r={r}, p={p}")
        self.base = base
        self.p = p
        self.r = r
        self.fiber_exponent = 2.0 * p / r
        self.dim = base.dim + p
        self.total_dim = self.dim
        self.name = f"{base.name}^({p},{r:g})"
        self.reinhardt = base.reinhardt
        self.bounding_radius = float(np.hypot(base.bounding_radius, np.sqrt(p)))
        if base.exponents is not None:
            self.exponents = base.exponents + (self.fiber_exponent,) * p
        self._fiber = EllipsoidDomain((self.fiber_exponent,) * p, name="fiber")

    def rho(self, z):
        z, single = _as_points(z, self.dim)
        nb = self.base.dim
        val = self.base.rho(z[:, :nb]) + (self._fiber.rho(z[:, nb:]) + 1.0)
        val = np.atleast_1d(val)
        return float(val[0]) if single else val

    def grad_rho(self, z):
        z, single = _as_points(z, self.dim)
        nb = self.base.dim
        out = np.empty_like(z)
        base_g = np.atleast_2d(self.base.grad_rho(z[:, :nb]) if not single
                               else self.base.grad_rho(z[0, :nb]))
        out[:, :nb] = base_g
        out[:, nb:] = np.atleast_2d(self._fiber.grad_rho(z[:, nb:]))
        return out[0] if single else out

    def hessian(self, point, x, y):
        # z and w decouple, so the cross blocks vanish
        point = np.asarray(point, dtype=np.complex128)
        x = np.asarray(x, dtype=np.complex128)
        y = np.asarray(y, dtype=np.complex128)
        nb = self.base.dim
        return (complex(self.base.hessian(point[:nb], x[:nb], y[:nb]))
                + self._fiber.hessian(point[nb:], x[nb:], y[nb:]))


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

def make_domain(name, **params):
    """Build a catalog domain by name.

    Names: ``disk``; ``ball`` (n <= 3); ``egg`` (m in {2, 3});
    ``smoothed_polydisk`` (m = 4); ``ellipsoid`` (free exponent list).
    """
    name = str(name).lower().replace("-", "_")
    if name == "disk":
        return EllipsoidDomain((2.0,), name="disk")
    if name == "ball":
        n = int(params.get("n", 2))
        if not 1 <= n <= 3:
            raise ParameterError(f"ball is cataloged for n <= 3, got n={n}")
        return EllipsoidDomain((2.0,) * n, name=f"ball{n}")
    if name == "egg":
        m = int(params.get("m", 2))
        if m not in (2, 3):
            raise ParameterError(f"egg is cataloged for m in {{2,3}}, got m={m}")
        return EllipsoidDomain((2.0, 2.0 * m), name=f"egg{m}")
    if name == "smoothed_polydisk":
        m = int(params.get("m", 4))
        if m != 4:
            raise ParameterError(f"smoothed_polydisk is cataloged for m=4, got m={m}")
        return EllipsoidDomain((2.0 * m, 2.0 * m), name="smoothed_polydisk")
    if name == "ellipsoid":
        exps = params.get("exponents")
        if not exps:
            raise ParameterError("ellipsoid requires an 'exponents' list")
        return EllipsoidDomain(tuple(exps))
    raise ParameterError(f"unknown domain {name!r}")


def domain_from_config(spec):
    """Domain from a config mapping like {"name": "egg", "m": 2}."""
    spec = dict(spec)
    name = spec.pop("name", None)
    if name is None:
        raise ParameterError("domain spec needs a 'name' field")
    dom = make_domain(name, **spec)
    if spec.get("inflate"):
        infl = spec["inflate"]
        dom = inflate(dom, infl["p"], infl["r"])
    return dom


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def rho_eval(domain, z):
    """Defining function value; negative inside, zero on boundary, positive out."""
    val = domain.rho(z)
    if np.any(~np.isfinite(np.atleast_1d(val))):
        raise ParameterError("rho evaluated to a non-finite value")
    return val


def complex_hessian(domain, point, x, y):
    """H_rho(P; X, Y) = sum_{j,k} d^2 rho/dz_j dzbar_k x_j ybar_k."""
    return domain.hessian(point, x, y)


def on_boundary(domain, point, coeff=BOUNDARY_TOL_COEFF):
    point = np.asarray(point, dtype=np.complex128)
    tol = coeff * (1.0 + float(np.sum(np.abs(point) ** 2)))
    return abs(domain.rho(point)) < tol


def _tangential_hessian(domain, point):
    """Levi form restricted to the complex tangent space at a boundary point."""
    n = domain.dim
    if hasattr(domain, "hessian_matrix"):
        h = domain.hessian_matrix(point)
    else:
        basis = np.eye(n, dtype=np.complex128)
        h = np.array([[domain.hessian(point, basis[j], basis[k])
                       for k in range(n)] for j in range(n)])
    g = np.asarray(domain.grad_rho(point), dtype=np.complex128)
    gnorm = float(np.linalg.norm(g))
    if gnorm <= 1e-12 * (1.0 + float(np.linalg.norm(point))):
        raise DegenerateGradientError(
            f"defining-function gradient vanishes at {point}")
    # X is complex tangent iff sum_j X_j (d rho/d z_j) = 0, i.e. X _|_ conj(g)
    nu = np.conj(g) / gnorm
    q, _ = np.linalg.qr(np.column_stack([nu, np.eye(n, dtype=np.complex128)]))
    tan = q[:, 1:n]
    m = tan.conj().T @ h @ tan
    m = 0.5 * (m + m.conj().T)
    return h, m


def classify_boundary(domain, point, tol=None):
    """Classify a boundary point as strongly or weakly pseudoconvex.

    The criterion is the minimum eigenvalue of the complex Hessian restricted
    to the complex tangent space; by default a point is strong when that
    eigenvalue exceeds ``1e-8 * (1 + max |Hessian entry|)``.
    """
    point = np.asarray(point, dtype=np.complex128)
    if not on_boundary(domain, point):
        raise BoundaryError(
            f"point {point} is not on the boundary (rho = {domain.rho(point):g})")
    if domain.dim == 1:
        g = np.asarray(domain.grad_rho(point), dtype=np.complex128)
        if np.linalg.norm(g) <= 1e-12 * (1.0 + abs(complex(point[0]))):
            raise DegenerateGradientError(
                f"defining-function gradient vanishes at {point}")
        used = 0.0 if tol is None else float(tol)
        # trivial complex tangent space: vacuously strongly pseudoconvex
        return BoundaryClassification(point, PointKind.STRONGLY_PSEUDOCONVEX,
                                      float("inf"), used)
    h, m = _tangential_hessian(domain, point)
    lam_min = float(np.linalg.eigvalsh(m)[0])
    used = float(tol) if tol is not None else \
        STRONG_TOL_COEFF * (1.0 + float(np.max(np.abs(h))))
    kind = (PointKind.STRONGLY_PSEUDOCONVEX if lam_min > used
            else PointKind.WEAKLY_PSEUDOCONVEX)
    return BoundaryClassification(point, kind, lam_min, used)


def inflate(base, p, r):
    """Attach p fiber coordinates with exponent 2p/r; requires 0 < r <= p."""
    return InflatedDomain(base, p, r)


def boundary_point(domain, direction):
    """Scale a direction vector onto the boundary (rho = 0 along the ray)."""
    d = np.asarray(direction, dtype=np.complex128)
    if np.allclose(d, 0):
        raise ParameterError("direction must be nonzero")
    lo, hi = 0.0, 1.0
    while domain.rho(hi * d) < 0:
        hi *= 2.0
        if hi > 1e9:
            raise ParameterError("ray never leaves the domain")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if domain.rho(mid * d) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi) * d


@dataclass(frozen=True)
class InflationBoundaryReport:
    fraction_strong: float
    min_tangential_eigenvalue: float
    samples: int


def inflated_boundary_classification_check(infl, z0, samples, seed=0,
                                           shrink=0.05):
    """Sample inflated-boundary points near a strong base point and classify.

    Points (z, w) on the inflated boundary are drawn with z = (1-u) z0 for
    u in (0, shrink] and w on the fiber sphere with every w_k != 0; all are
    expected strongly pseudoconvex.
    """
    if not isinstance(infl, InflatedDomain):
        raise ParameterError("first argument must be an InflatedDomain")
    z0 = np.asarray(z0, dtype=np.complex128)
    base_cls = classify_boundary(infl.base, z0)
    if base_cls.kind is not PointKind.STRONGLY_PSEUDOCONVEX:
        raise ParameterError(f"base point {z0} is not strongly pseudoconvex")
    rng = np.random.default_rng(seed)
    p, r = infl.p, infl.r
    n_strong = 0
    lam_min = np.inf
    for _ in range(samples):
        u = rng.uniform(0.0, shrink)
        z = (1.0 - u) * z0
        s = -float(infl.base.rho(z))
        # simplex split of the fiber radius; resample to keep every w_k != 0
        t = rng.dirichlet(np.ones(p))
        while np.any(t < 1e-12):
            t = rng.dirichlet(np.ones(p))
        radii = (t * s) ** (r / (2.0 * p))
        phases = np.exp(2j * np.pi * rng.uniform(size=p))
        w = radii * phases
        cls = classify_boundary(infl, np.concatenate([z, w]))
        if cls.kind is PointKind.STRONGLY_PSEUDOCONVEX:
            n_strong += 1
        lam_min = min(lam_min, cls.min_tangential_eigenvalue)
    return InflationBoundaryReport(n_strong / samples, float(lam_min), samples)


def sample_boundary(domain, count, seed=0):
    """Deterministic-ish boundary sample for an ellipsoid domain.

    Splits the modulus profile over the simplex and randomizes phases;
    includes the coordinate-axis points, where weak points live on eggs
    and smoothed polydisks.
    """
    if domain.exponents is None:
        raise ParameterError("sample_boundary needs an ellipsoid domain")
    rng = np.random.default_rng(seed)
    n = domain.dim
    q = np.asarray(domain.exponents)
    pts = []
    for j in range(n):
        e = np.zeros(n, dtype=np.complex128)
        e[j] = 1.0
        pts.append(e)
    while len(pts) < count:
        t = rng.dirichlet(np.ones(n))
        radii = t ** (1.0 / q)
        phases = np.exp(2j * np.pi * rng.uniform(size=n))
        pts.append(radii * phases)
    return np.array(pts[:count])
