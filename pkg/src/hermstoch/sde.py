"""Euler-Maruyama integration with reproducible, coupled noise.

Increments are drawn from a counter-based Philox stream keyed by
(seed, path_index), so every path is deterministic on its own and the
ensemble does not depend on execution order.  The same increment matrix
can be handed to several integrators (finite-dimensional SDE and the
Galerkin SPDE engine) for common-noise comparisons.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


class BlowUpError(RuntimeError):
    """Non-finite state during integration; carries the offending step."""

    def __init__(self, step: int, time: float):
        super().__init__(f"non-finite state at step {step} (t = {time:.6g})")
        self.step = step
        self.time = time


@dataclass(frozen=True)
class SdeModel:
    """Finite-dimensional SDE dX = b(X) dt + sum_j sigma^j(X) dW^j.

    drift maps a state (d,) to (d,); diffusion_columns maps a state to a
    (d, r) matrix whose column j is the field sigma^j; the optional
    diffusion_jacobians maps a state to an (r, d, d) stack with entry
    [j][i, k] = d sigma^j_i / d x_k (used by the Stratonovich correction).
    """

    dimension: int
    noise_count: int
    drift: Callable[[np.ndarray], np.ndarray]
    diffusion_columns: Callable[[np.ndarray], np.ndarray]
    diffusion_jacobians: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = ""


@dataclass(frozen=True)
class Trajectory:
    """One simulated path: grid, states, and the Wiener increments used."""

    times: np.ndarray
    states: np.ndarray
    wiener_increments: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError("times and states length mismatch")
        if len(self.wiener_increments) != len(self.times) - 1:
            raise ValueError("need one increment row per step")

    @property
    def dimension(self) -> int:
        return self.states.shape[1]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t"] + [f"x_{i+1}" for i in range(self.dimension)])
            for t, x in zip(self.times, self.states):
                writer.writerow([repr(float(t))] + [repr(float(v)) for v in x])

    def to_json(self) -> dict:
        return {
            "times": self.times.tolist(),
            "states": self.states.tolist(),
            "wiener_increments": self.wiener_increments.tolist(),
            "seed": self.seed,
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def from_json(cls, data: dict) -> "Trajectory":
        return cls(times=np.asarray(data["times"], dtype=float),
                   states=np.asarray(data["states"], dtype=float),
                   wiener_increments=np.asarray(data["wiener_increments"], dtype=float),
                   seed=data.get("seed"))


def coupled_increments(seed: int, n_steps: int, noise_count: int, dt: float,
                       path_index: int = 0) -> np.ndarray:
    """Deterministic N(0, dt) increment matrix of shape (n_steps, noise_count).

    The Philox generator is keyed by (seed, path_index); a fixed draw
    layout makes the matrix independent of how many other paths exist or
    in which order they are generated.
    """
    bitgen = np.random.Philox(key=np.array([seed, path_index], dtype=np.uint64))
    gen = np.random.Generator(bitgen)
    return gen.standard_normal((n_steps, noise_count)) * np.sqrt(dt)


def euler_maruyama(model: SdeModel, x0, T: float, dt: float,
                   seed: int = 0, path_index: int = 0,
                   increments: Optional[np.ndarray] = None) -> Trajectory:
    """Integrate the SDE on [0, T] with the explicit Euler-Maruyama step.

    X_{k+1} = X_k + b(X_k) dt + sum_j sigma^j(X_k) dW^j_k.  Strong order
    1/2.  Pass a precomputed increment matrix for common-noise coupling;
    otherwise increments come from coupled_increments(seed, ...).

    Raises BlowUpError with the step index if the state turns non-finite.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if T < dt:
        raise ValueError("horizon must cover at least one step")
    n_steps = int(round(T / dt))
    if increments is None:
        increments = coupled_increments(seed, n_steps, model.noise_count, dt, path_index)
    if increments.shape != (n_steps, model.noise_count):
        raise ValueError(f"increments must have shape ({n_steps}, {model.noise_count})")

    x = np.array(x0, dtype=float)
    if x.shape != (model.dimension,):
        raise ValueError(f"x0 must have shape ({model.dimension},)")
    times = dt * np.arange(n_steps + 1)
    states = np.empty((n_steps + 1, model.dimension))
    states[0] = x
    for k in range(n_steps):
        x = x + model.drift(x) * dt + model.diffusion_columns(x) @ increments[k]
        if not np.all(np.isfinite(x)):
            raise BlowUpError(step=k + 1, time=times[k + 1])
        states[k + 1] = x
    return Trajectory(times=times, states=states,
                      wiener_increments=increments, seed=seed)
