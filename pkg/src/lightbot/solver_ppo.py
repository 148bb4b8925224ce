"""Reinforcement-learning flat-solution search: PPO with a clipped objective
over the binary state encoding, then best-of-N rollout extraction.

Networks are two-layer tanh MLPs in float64 numpy with hand-written
backpropagation, so gradients are checkable against central finite
differences and training is bit-reproducible from a single seed. Rewards are
-1 per action plus +1 whenever a light turns on; an episode ends on puzzle
completion or at the episode cap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .world import Action, Puzzle, WorldState, encode_state, initial_state, is_complete, step

__all__ = [
    "MLP",
    "MLPGrads",
    "AdamState",
    "Hyperparams",
    "Rollout",
    "TrainResult",
    "NonFiniteLossError",
    "RolloutFailure",
    "mlp_init",
    "mlp_forward",
    "mlp_backward",
    "policy_forward",
    "policy_log_probs",
    "value_forward",
    "flatten_params",
    "set_flat_params",
    "collect_rollout",
    "gae_advantages",
    "policy_loss_and_grads",
    "value_loss_and_grads",
    "ppo_update",
    "train",
    "sample_episode",
    "greedy_rollout",
    "best_of_rollouts",
    "replay_rewards",
]

N_ACTIONS = len(Action)


@dataclass
class Hyperparams:
    """PPO settings. The clipped-objective, reward scheme, and two-layer
    networks are fixed; everything here is tunable."""

    clip_eps: float = 0.2
    gamma: float = 0.99
    gae_lambda: float = 0.95
    learning_rate: float = 3e-4
    horizon: int = 2048
    epochs: int = 10
    minibatch_size: int = 64
    entropy_coef: float = 0.01
    episode_cap: int = 500
    hidden_size: int = 64
    max_env_steps: int = 400_000
    convergence_window: int = 20
    convergence_patience: int = 50
    convergence_min_improvement: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.clip_eps < 1.0:
            raise ValueError("clip_eps must be in (0, 1)")
        if not 0.0 < self.gamma <= 1.0 or not 0.0 <= self.gae_lambda <= 1.0:
            raise ValueError("gamma must be in (0, 1], gae_lambda in [0, 1]")


class NonFiniteLossError(RuntimeError):
    """An update produced a non-finite loss; diagnostics attached."""

    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


class RolloutFailure(RuntimeError):
    """No sampled rollout completed the puzzle."""


@dataclass
class MLP:
    """input -> tanh hidden -> linear output."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    @property
    def n_in(self) -> int:
        return self.w1.shape[0]

    @property
    def n_out(self) -> int:
        return self.w2.shape[1]

    def copy(self) -> "MLP":
        return MLP(self.w1.copy(), self.b1.copy(), self.w2.copy(), self.b2.copy())


@dataclass
class MLPGrads:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray


def _orthogonal(rng: np.random.Generator, rows: int, cols: int, gain: float) -> np.ndarray:
    a = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    q *= np.sign(np.diag(r))  # fix QR sign ambiguity
    if rows < cols:
        q = q.T
    return gain * q


def mlp_init(
    rng: np.random.Generator, n_in: int, n_hidden: int, n_out: int, out_gain: float = 1.0
) -> MLP:
    """Orthogonal weights (hidden gain sqrt(2), output gain as given), zero
    biases, float64 throughout."""
    return MLP(
        w1=_orthogonal(rng, n_in, n_hidden, np.sqrt(2.0)),
        b1=np.zeros(n_hidden),
        w2=_orthogonal(rng, n_hidden, n_out, out_gain),
        b2=np.zeros(n_out),
    )


def mlp_forward(net: MLP, x: np.ndarray) -> tuple[np.ndarray, tuple]:
    """x: (B, n_in) -> output (B, n_out) plus the cache backward needs."""
    if x.ndim != 2 or x.shape[1] != net.n_in:
        raise ValueError(f"expected input (*, {net.n_in}), got {x.shape}")
    hidden = np.tanh(x @ net.w1 + net.b1)
    return hidden @ net.w2 + net.b2, (x, hidden)


def mlp_backward(net: MLP, cache: tuple, dout: np.ndarray) -> tuple[MLPGrads, np.ndarray]:
    """Backprop dout (B, n_out) through the net; returns parameter gradients
    and the input gradient."""
    x, hidden = cache
    dw2 = hidden.T @ dout
    db2 = dout.sum(axis=0)
    dhidden = dout @ net.w2.T
    dz1 = dhidden * (1.0 - hidden * hidden)
    dw1 = x.T @ dz1
    db1 = dz1.sum(axis=0)
    dx = dz1 @ net.w1.T
    return MLPGrads(dw1, db1, dw2, db2), dx


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def policy_forward(net: MLP, features: np.ndarray) -> np.ndarray:
    """Action probability distribution(s) for one feature vector or a batch."""
    single = features.ndim == 1
    x = features.reshape(1, -1) if single else features
    logits, _ = mlp_forward(net, x)
    probs = np.exp(_log_softmax(logits))
    return probs[0] if single else probs


def policy_log_probs(net: MLP, features: np.ndarray) -> np.ndarray:
    single = features.ndim == 1
    x = features.reshape(1, -1) if single else features
    logits, _ = mlp_forward(net, x)
    out = _log_softmax(logits)
    return out[0] if single else out


def value_forward(net: MLP, features: np.ndarray) -> np.ndarray | float:
    """State-value estimate(s)."""
    single = features.ndim == 1
    x = features.reshape(1, -1) if single else features
    out, _ = mlp_forward(net, x)
    return float(out[0, 0]) if single else out[:, 0]


def flatten_params(net: MLP) -> np.ndarray:
    return np.concatenate([net.w1.ravel(), net.b1, net.w2.ravel(), net.b2])


def set_flat_params(net: MLP, flat: np.ndarray) -> None:
    i = 0
    for arr in (net.w1, net.b1, net.w2, net.b2):
        arr[...] = flat[i : i + arr.size].reshape(arr.shape)
        i += arr.size
    if i != flat.size:
        raise ValueError(f"expected {i} parameters, got {flat.size}")


def flatten_grads(grads: MLPGrads) -> np.ndarray:
    return np.concatenate([grads.w1.ravel(), grads.b1, grads.w2.ravel(), grads.b2])


@dataclass
class Rollout:
    """Per-step experience plus episode bookkeeping for convergence checks."""

    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    log_probs: np.ndarray
    values: np.ndarray
    dones: np.ndarray
    bootstrap_value: float
    episode_returns: list[float] = field(default_factory=list)
    episode_lengths: list[int] = field(default_factory=list)
    episodes_completed: int = 0

    def __len__(self) -> int:
        return len(self.actions)


def _sample_action(probs: np.ndarray, rng: np.random.Generator) -> int:
    # inverse-CDF draw; rng.choice would work but this keeps the stream lean
    u = rng.random()
    return int(min(np.searchsorted(np.cumsum(probs), u, side="right"), N_ACTIONS - 1))


def collect_rollout(
    puzzle: Puzzle,
    policy: MLP,
    value_net: MLP,
    horizon: int,
    episode_cap: int,
    rng: np.random.Generator,
) -> Rollout:
    """Sample `horizon` environment steps from the stochastic policy,
    resetting whenever an episode ends (completion or cap)."""
    # The policy is frozen for the whole rollout and the state space is tiny,
    # so per-state outputs are memoised.
    memo: dict[WorldState, tuple[np.ndarray, np.ndarray, np.ndarray, float]] = {}

    def lookup(state: WorldState):
        hit = memo.get(state)
        if hit is None:
            feat = encode_state(puzzle, state)
            x = feat.reshape(1, -1)
            logp = _log_softmax(mlp_forward(policy, x)[0])[0]
            value = float(mlp_forward(value_net, x)[0][0, 0])
            hit = (feat, np.exp(logp), logp, value)
            memo[state] = hit
        return hit

    states = np.empty((horizon, encode_state(puzzle, initial_state(puzzle)).size))
    actions = np.empty(horizon, dtype=np.int64)
    rewards = np.empty(horizon)
    log_probs = np.empty(horizon)
    values = np.empty(horizon)
    dones = np.zeros(horizon, dtype=bool)
    episode_returns: list[float] = []
    episode_lengths: list[int] = []
    episodes_completed = 0

    state = initial_state(puzzle)
    ep_return = 0.0
    ep_steps = 0
    for t in range(horizon):
        feat, probs, logp, value = lookup(state)
        a = _sample_action(probs, rng)
        nxt, event = step(puzzle, state, Action(a))
        reward = -1.0 + (1.0 if event.light_turned_on is not None else 0.0)
        ep_return += reward
        ep_steps += 1
        completed = is_complete(puzzle, nxt)
        done = completed or ep_steps >= episode_cap
        states[t] = feat
        actions[t] = a
        rewards[t] = reward
        log_probs[t] = logp[a]
        values[t] = value
        dones[t] = done
        if done:
            episode_returns.append(ep_return)
            episode_lengths.append(ep_steps)
            episodes_completed += int(completed)
            state = initial_state(puzzle)
            ep_return = 0.0
            ep_steps = 0
        else:
            state = nxt
    bootstrap = 0.0 if dones[-1] else lookup(state)[3]
    return Rollout(
        states=states,
        actions=actions,
        rewards=rewards,
        log_probs=log_probs,
        values=values,
        dones=dones,
        bootstrap_value=bootstrap,
        episode_returns=episode_returns,
        episode_lengths=episode_lengths,
        episodes_completed=episodes_completed,
    )


def gae_advantages(rollout: Rollout, gamma: float, lam: float) -> np.ndarray:
    """Generalized advantage estimates, masked at episode boundaries. With
    lam=1 these reduce to discounted return minus the value baseline; with
    lam=0 to one-step TD errors."""
    T = len(rollout)
    adv = np.zeros(T)
    next_value = rollout.bootstrap_value
    running = 0.0
    for t in range(T - 1, -1, -1):
        live = 0.0 if rollout.dones[t] else 1.0
        delta = rollout.rewards[t] + gamma * next_value * live - rollout.values[t]
        running = delta + gamma * lam * live * running
        adv[t] = running
        next_value = rollout.values[t]
    return adv


def policy_loss_and_grads(
    policy: MLP,
    states: np.ndarray,
    actions: np.ndarray,
    old_log_probs: np.ndarray,
    advantages: np.ndarray,
    clip_eps: float,
    entropy_coef: float,
) -> tuple[float, MLPGrads, dict]:
    """Clipped-surrogate policy loss (to minimise) with entropy bonus, plus
    its exact gradients.

    loss = -mean(min(r*A, clip(r, 1-eps, 1+eps)*A)) - entropy_coef*mean(H)
    with r the new/old probability ratio of the taken action.
    """
    B = len(actions)
    logits, cache = mlp_forward(policy, states)
    log_all = _log_softmax(logits)
    probs = np.exp(log_all)
    log_taken = log_all[np.arange(B), actions]
    ratio = np.exp(log_taken - old_log_probs)
    surr_raw = ratio * advantages
    surr_clip = np.clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * advantages
    objective = np.minimum(surr_raw, surr_clip)
    entropy = -(probs * log_all).sum(axis=1)
    loss = float(-objective.mean() - entropy_coef * entropy.mean())

    # Gradient flows through the unclipped branch only where it attains the
    # min; where the clipped branch is strictly smaller the ratio sits
    # outside the clip interval, so its derivative is zero.
    use_raw = surr_raw <= surr_clip
    dlog_taken = np.where(use_raw, ratio * advantages, 0.0) / B
    one_hot = np.zeros_like(probs)
    one_hot[np.arange(B), actions] = 1.0
    dlogits = -dlog_taken[:, None] * (one_hot - probs)
    dlogits += (entropy_coef / B) * probs * (log_all + entropy[:, None])
    grads, _ = mlp_backward(policy, cache, dlogits)
    diag = {
        "entropy": float(entropy.mean()),
        "clip_fraction": float(np.mean(~use_raw)),
    }
    return loss, grads, diag


def value_loss_and_grads(
    value_net: MLP, states: np.ndarray, returns: np.ndarray
) -> tuple[float, MLPGrads]:
    """Half mean-squared error of the value head against empirical returns."""
    out, cache = mlp_forward(value_net, states)
    err = out[:, 0] - returns
    loss = float(0.5 * np.mean(err * err))
    dout = (err / len(returns))[:, None]
    grads, _ = mlp_backward(value_net, cache, dout)
    return loss, grads


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def for_net(cls, net: MLP) -> "AdamState":
        n = flatten_params(net).size
        return cls(m=np.zeros(n), v=np.zeros(n))


def adam_step(
    net: MLP,
    grads: MLPGrads,
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    g = flatten_grads(grads)
    state.t += 1
    state.m = beta1 * state.m + (1.0 - beta1) * g
    state.v = beta2 * state.v + (1.0 - beta2) * g * g
    m_hat = state.m / (1.0 - beta1**state.t)
    v_hat = state.v / (1.0 - beta2**state.t)
    flat = flatten_params(net) - lr * m_hat / (np.sqrt(v_hat) + eps)
    set_flat_params(net, flat)


def ppo_update(
    policy: MLP,
    value_net: MLP,
    batch: dict,
    hyper: Hyperparams,
    policy_opt: AdamState,
    value_opt: AdamState,
    rng: np.random.Generator,
) -> dict:
    """One PPO update: several epochs of shuffled minibatch ascent on the
    clipped surrogate plus value regression. Mutates the nets in place and
    returns averaged diagnostics. Raises NonFiniteLossError on divergence."""
    T = len(batch["actions"])
    policy_losses, value_losses, entropies, clip_fracs = [], [], [], []
    for _ in range(hyper.epochs):
        order = rng.permutation(T)
        for start in range(0, T, hyper.minibatch_size):
            idx = order[start : start + hyper.minibatch_size]
            p_loss, p_grads, diag = policy_loss_and_grads(
                policy,
                batch["states"][idx],
                batch["actions"][idx],
                batch["old_log_probs"][idx],
                batch["advantages"][idx],
                hyper.clip_eps,
                hyper.entropy_coef,
            )
            v_loss, v_grads = value_loss_and_grads(
                value_net, batch["states"][idx], batch["returns"][idx]
            )
            if not np.isfinite(p_loss) or not np.isfinite(v_loss):
                raise NonFiniteLossError(
                    "non-finite loss during update",
                    {"policy_loss": p_loss, "value_loss": v_loss, **diag},
                )
            adam_step(policy, p_grads, policy_opt, hyper.learning_rate)
            adam_step(value_net, v_grads, value_opt, hyper.learning_rate)
            policy_losses.append(p_loss)
            value_losses.append(v_loss)
            entropies.append(diag["entropy"])
            clip_fracs.append(diag["clip_fraction"])
    return {
        "policy_loss": float(np.mean(policy_losses)),
        "value_loss": float(np.mean(value_losses)),
        "entropy": float(np.mean(entropies)),
        "clip_fraction": float(np.mean(clip_fracs)),
    }


@dataclass
class TrainResult:
    policy: MLP
    value_net: MLP
    history: list[dict]
    converged: bool
    total_env_steps: int
    completed_any: bool


def train(puzzle: Puzzle, hyper: Hyperparams = Hyperparams()) -> TrainResult:
    """Collect/update until the episode-return moving average plateaus
    (window `convergence_window`, no gain of `convergence_min_improvement`
    for `convergence_patience` consecutive updates) or the env-step cap.
    Fully reproducible: all randomness flows from hyper.seed."""
    rng = np.random.default_rng(hyper.seed)
    n_features = encode_state(puzzle, initial_state(puzzle)).size
    policy = mlp_init(rng, n_features, hyper.hidden_size, N_ACTIONS, out_gain=0.01)
    value_net = mlp_init(rng, n_features, hyper.hidden_size, 1, out_gain=1.0)
    policy_opt = AdamState.for_net(policy)
    value_opt = AdamState.for_net(value_net)

    history: list[dict] = []
    recent_returns: list[float] = []
    best_avg = -np.inf
    stalled = 0
    total_steps = 0
    completed_any = False
    converged = False

    while total_steps < hyper.max_env_steps:
        rollout = collect_rollout(
            puzzle, policy, value_net, hyper.horizon, hyper.episode_cap, rng
        )
        total_steps += len(rollout)
        completed_any = completed_any or rollout.episodes_completed > 0
        advantages = gae_advantages(rollout, hyper.gamma, hyper.gae_lambda)
        returns = advantages + rollout.values
        norm_adv = (advantages - advantages.mean()) / (advantages.std() + 1e-8)
        batch = {
            "states": rollout.states,
            "actions": rollout.actions,
            "old_log_probs": rollout.log_probs,
            "advantages": norm_adv,
            "returns": returns,
        }
        diag = ppo_update(policy, value_net, batch, hyper, policy_opt, value_opt, rng)
        recent_returns.extend(rollout.episode_returns)
        window = recent_returns[-hyper.convergence_window :]
        avg_return = float(np.mean(window)) if window else float("nan")
        diag.update(
            update=len(history),
            env_steps=total_steps,
            episodes=len(rollout.episode_returns),
            mean_return=avg_return,
        )
        history.append(diag)
        if len(recent_returns) >= hyper.convergence_window:
            if avg_return >= best_avg + hyper.convergence_min_improvement:
                best_avg = avg_return
                stalled = 0
            else:
                stalled += 1
            if stalled >= hyper.convergence_patience:
                converged = True
                break
    return TrainResult(
        policy=policy,
        value_net=value_net,
        history=history,
        converged=converged,
        total_env_steps=total_steps,
        completed_any=completed_any,
    )


def sample_episode(
    policy: MLP,
    puzzle: Puzzle,
    rng: Optional[np.random.Generator],
    episode_cap: int = 500,
    greedy: bool = False,
) -> tuple[list[Action], bool]:
    """Run one episode; returns (actions, completed). Greedy mode takes the
    argmax action instead of sampling."""
    state = initial_state(puzzle)
    actions: list[Action] = []
    for _ in range(episode_cap):
        probs = policy_forward(policy, encode_state(puzzle, state))
        a = int(np.argmax(probs)) if greedy else _sample_action(probs, rng)
        state, _ = step(puzzle, state, Action(a))
        actions.append(Action(a))
        if is_complete(puzzle, state):
            return actions, True
    return actions, False


def greedy_rollout(policy: MLP, puzzle: Puzzle, episode_cap: int = 500) -> tuple[list[Action], bool]:
    return sample_episode(policy, puzzle, None, episode_cap, greedy=True)


def best_of_rollouts(
    policy: MLP,
    puzzle: Puzzle,
    n: int = 100,
    rng: Optional[np.random.Generator] = None,
    episode_cap: int = 500,
) -> list[Action]:
    """Sample n stochastic rollouts and return the completing one with the
    fewest actions. Raises RolloutFailure if none completes."""
    if rng is None:
        rng = np.random.default_rng()
    best: Optional[list[Action]] = None
    for _ in range(n):
        actions, completed = sample_episode(policy, puzzle, rng, episode_cap)
        if completed and (best is None or len(actions) < len(best)):
            best = actions
    if best is None:
        raise RolloutFailure(f"no completing rollout among {n}")
    return best


def replay_rewards(puzzle: Puzzle, actions: list[Action]) -> list[float]:
    """Rewards the environment would emit for a fixed action sequence; used
    to cross-check episode-return accounting."""
    state = initial_state(puzzle)
    rewards = []
    for action in actions:
        state, event = step(puzzle, state, action)
        rewards.append(-1.0 + (1.0 if event.light_turned_on is not None else 0.0))
    return rewards
