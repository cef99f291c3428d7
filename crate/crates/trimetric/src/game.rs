//! Normal-form games and strategic-robustness estimation.
//!
//! The engine covers: expected payoffs over mixed profiles, best-response
//! sets, exact Nash solving for two-player games by support enumeration,
//! two learning dynamics (simultaneous best-response dynamics and fictitious
//! play), and two robustness readings built on them:
//!
//! * `ner_literal` — the trajectory estimator: the minimum over players and
//!   steps of the Euclidean distance from a player's strategy to the face of
//!   the simplex spanned by its current best responses. Zero at any
//!   best-response fixed point.
//! * `ner_epsilon` — deviation-gain reading: the smallest distance from a
//!   verified equilibrium strategy to any grid strategy that improves the
//!   deviating player's payoff by more than `epsilon`. When no such
//!   deviation exists the vertex-to-vertex simplex diameter `sqrt(2)` is
//!   returned as an explicit sentinel.
//!
//! Players and actions are 0-indexed throughout. All routines are
//! deterministic; ties break toward the lowest action index.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default tolerance for best-response and equilibrium comparisons.
pub const DEFAULT_BR_TOL: f64 = 1e-9;
/// Equilibria handed to `ner_epsilon` must be this tight.
pub const EQUILIBRIUM_VERIFY_TOL: f64 = 1e-6;
/// L-infinity distance under which two equilibria are considered duplicates.
const DEDUP_TOL: f64 = 1e-7;
/// Pivot threshold for the linear solver.
const PIVOT_TOL: f64 = 1e-12;
/// Returned by [`ner_epsilon`] when no profitable deviation exists.
pub const NO_DEVIATION_SENTINEL: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("player index {player} out of range for {players} players")]
    IndexOutOfRange { player: usize, players: usize },
    #[error("best-response set is empty")]
    EmptyBrSet,
    #[error("unsupported game: {0}")]
    UnsupportedGame(String),
    #[error("not an equilibrium: {0}")]
    NotAnEquilibrium(String),
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// A finite game: per-player action counts and a flat payoff tensor.
///
/// Pure profiles are enumerated row-major with player 0 slowest; each
/// profile contributes one payoff per player, ordered by player.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormGame {
    action_counts: Vec<usize>,
    payoffs: Vec<f64>,
}

#[derive(Deserialize)]
struct GameDoc {
    action_counts: Vec<usize>,
    payoffs: Vec<f64>,
}

impl NormalFormGame {
    pub fn new(action_counts: Vec<usize>, payoffs: Vec<f64>) -> Result<Self, GameError> {
        if action_counts.len() < 2 {
            return Err(GameError::InvalidGame(
                "a game needs at least two players".into(),
            ));
        }
        if action_counts.iter().any(|&n| n < 2) {
            return Err(GameError::InvalidGame(
                "every player needs at least two actions".into(),
            ));
        }
        let profiles: usize = action_counts
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .ok_or_else(|| GameError::InvalidGame("payoff tensor size overflows".into()))?;
        let expected = profiles
            .checked_mul(action_counts.len())
            .ok_or_else(|| GameError::InvalidGame("payoff tensor size overflows".into()))?;
        if payoffs.len() != expected {
            return Err(GameError::InvalidGame(format!(
                "payoff tensor has {} entries, expected {expected}",
                payoffs.len()
            )));
        }
        if payoffs.iter().any(|v| !v.is_finite()) {
            return Err(GameError::InvalidGame("payoffs must be finite".into()));
        }
        Ok(NormalFormGame {
            action_counts,
            payoffs,
        })
    }

    /// Parses the JSON game document `{"action_counts": [...], "payoffs": [...]}`.
    pub fn from_json_str(json: &str) -> Result<Self, GameError> {
        let doc: GameDoc = serde_json::from_str(json)
            .map_err(|e| GameError::InvalidGame(format!("game JSON: {e}")))?;
        NormalFormGame::new(doc.action_counts, doc.payoffs)
    }

    pub fn num_players(&self) -> usize {
        self.action_counts.len()
    }

    pub fn action_counts(&self) -> &[usize] {
        &self.action_counts
    }

    fn check_player(&self, player: usize) -> Result<(), GameError> {
        if player >= self.num_players() {
            return Err(GameError::IndexOutOfRange {
                player,
                players: self.num_players(),
            });
        }
        Ok(())
    }

    /// Payoff to `player` at the pure `profile`.
    pub fn payoff(&self, profile: &[usize], player: usize) -> f64 {
        let mut idx = 0usize;
        for (a, n) in profile.iter().zip(&self.action_counts) {
            idx = idx * n + a;
        }
        self.payoffs[idx * self.num_players() + player]
    }

    /// Classic 2x2 dilemma: cooperate/defect with payoffs
    /// CC=(3,3), CD=(0,5), DC=(5,0), DD=(1,1). Defection dominates.
    pub fn prisoners_dilemma() -> Self {
        NormalFormGame::new(vec![2, 2], vec![3.0, 3.0, 0.0, 5.0, 5.0, 0.0, 1.0, 1.0]).unwrap()
    }

    /// Zero-sum matching game: player 0 wins on a match, player 1 on a
    /// mismatch. Unique equilibrium at uniform mixing.
    pub fn matching_pennies() -> Self {
        NormalFormGame::new(vec![2, 2], vec![1.0, -1.0, -1.0, 1.0, -1.0, 1.0, 1.0, -1.0]).unwrap()
    }

    /// Rock-paper-scissors with win = 1, loss = -1, tie = 0.
    pub fn rock_paper_scissors() -> Self {
        let sign = [[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]];
        let mut payoffs = Vec::with_capacity(18);
        for row in &sign {
            for &value in row {
                payoffs.push(value);
                payoffs.push(-value);
            }
        }
        NormalFormGame::new(vec![3, 3], payoffs).unwrap()
    }
}

/// One probability vector per player.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixedProfile {
    strategies: Vec<Vec<f64>>,
}

impl MixedProfile {
    /// Validates shapes and probability constraints, then renormalizes each
    /// vector to sum exactly to 1.
    pub fn new(strategies: Vec<Vec<f64>>, game: &NormalFormGame) -> Result<Self, GameError> {
        if strategies.len() != game.num_players() {
            return Err(GameError::InvalidProfile(format!(
                "{} strategy vectors for {} players",
                strategies.len(),
                game.num_players()
            )));
        }
        let mut cleaned = Vec::with_capacity(strategies.len());
        for (i, s) in strategies.into_iter().enumerate() {
            if s.len() != game.action_counts[i] {
                return Err(GameError::InvalidProfile(format!(
                    "player {i} has {} probabilities for {} actions",
                    s.len(),
                    game.action_counts[i]
                )));
            }
            let mut v = s;
            for p in &mut v {
                if !p.is_finite() || *p < -1e-12 {
                    return Err(GameError::InvalidProfile(format!(
                        "player {i} has a negative or non-finite probability"
                    )));
                }
                if *p < 0.0 {
                    *p = 0.0;
                }
            }
            let sum: f64 = v.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(GameError::InvalidProfile(format!(
                    "player {i} probabilities sum to {sum}"
                )));
            }
            for p in &mut v {
                *p /= sum;
            }
            cleaned.push(v);
        }
        Ok(MixedProfile {
            strategies: cleaned,
        })
    }

    /// Degenerate profile at one pure action per player.
    pub fn pure(actions: &[usize], game: &NormalFormGame) -> Result<Self, GameError> {
        if actions.len() != game.num_players() {
            return Err(GameError::InvalidProfile(
                "one action per player required".into(),
            ));
        }
        let mut strategies = Vec::with_capacity(actions.len());
        for (i, &a) in actions.iter().enumerate() {
            if a >= game.action_counts[i] {
                return Err(GameError::InvalidProfile(format!(
                    "action {a} out of range for player {i}"
                )));
            }
            let mut v = vec![0.0; game.action_counts[i]];
            v[a] = 1.0;
            strategies.push(v);
        }
        Ok(MixedProfile { strategies })
    }

    /// Uniform mixing for every player.
    pub fn uniform(game: &NormalFormGame) -> Self {
        let strategies = game
            .action_counts
            .iter()
            .map(|&n| vec![1.0 / n as f64; n])
            .collect();
        MixedProfile { strategies }
    }

    pub fn strategies(&self) -> &[Vec<f64>] {
        &self.strategies
    }

    pub fn linf_distance(&self, other: &MixedProfile) -> f64 {
        self.strategies
            .iter()
            .flatten()
            .zip(other.strategies.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn from_normalized(strategies: Vec<Vec<f64>>) -> Self {
        MixedProfile { strategies }
    }
}

/// Iterates every pure profile, calling `f(profile_actions, profile_index)`.
fn for_each_profile(action_counts: &[usize], mut f: impl FnMut(&[usize])) {
    let mut actions = vec![0usize; action_counts.len()];
    loop {
        f(&actions);
        let mut pos = action_counts.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            actions[pos] += 1;
            if actions[pos] < action_counts[pos] {
                break;
            }
            actions[pos] = 0;
        }
    }
}

/// Expected payoff to `player` under a mixed profile: the payoff of each
/// pure profile weighted by its product probability.
pub fn expected_payoff(
    game: &NormalFormGame,
    profile: &MixedProfile,
    player: usize,
) -> Result<f64, GameError> {
    game.check_player(player)?;
    let mut total = 0.0;
    for_each_profile(&game.action_counts, |actions| {
        let mut prob = 1.0;
        for (j, &a) in actions.iter().enumerate() {
            prob *= profile.strategies[j][a];
        }
        if prob != 0.0 {
            total += prob * game.payoff(actions, player);
        }
    });
    Ok(total)
}

/// Payoff to `player` for each of its pure actions against the others'
/// mixed strategies.
pub fn pure_payoff_vector(
    game: &NormalFormGame,
    profile: &MixedProfile,
    player: usize,
) -> Result<Vec<f64>, GameError> {
    game.check_player(player)?;
    let mut out = vec![0.0; game.action_counts[player]];
    for_each_profile(&game.action_counts, |actions| {
        let mut prob = 1.0;
        for (j, &a) in actions.iter().enumerate() {
            if j != player {
                prob *= profile.strategies[j][a];
            }
        }
        if prob != 0.0 {
            out[actions[player]] += prob * game.payoff(actions, player);
        }
    });
    Ok(out)
}

/// Pure actions of `player` whose payoff is within `tol` of the best.
pub fn best_response_set(
    game: &NormalFormGame,
    profile: &MixedProfile,
    player: usize,
    tol: f64,
) -> Result<Vec<usize>, GameError> {
    if tol.is_nan() || tol < 0.0 {
        return Err(GameError::InvalidParameter("tolerance must be >= 0".into()));
    }
    let payoffs = pure_payoff_vector(game, profile, player)?;
    let best = payoffs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(payoffs
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= best - tol)
        .map(|(a, _)| a)
        .collect())
}

/// Euclidean projection of `v` onto the probability simplex
/// (sort-and-threshold, Duchi et al. 2008).
pub fn project_onto_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - 1.0) / (k + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Distance from `profile.strategies[player]` to the nearest point on the
/// simplex face supported on `br_set`. Zero exactly when the strategy puts
/// no mass outside the best responses.
pub fn br_distance(
    profile: &MixedProfile,
    player: usize,
    br_set: &[usize],
) -> Result<f64, GameError> {
    if player >= profile.strategies.len() {
        return Err(GameError::IndexOutOfRange {
            player,
            players: profile.strategies.len(),
        });
    }
    if br_set.is_empty() {
        return Err(GameError::EmptyBrSet);
    }
    let s = &profile.strategies[player];
    if br_set.iter().any(|&a| a >= s.len()) {
        return Err(GameError::InvalidParameter(
            "best-response index out of range".into(),
        ));
    }
    let mut in_set = vec![false; s.len()];
    for &a in br_set {
        in_set[a] = true;
    }
    // Off-face coordinates are forced to zero; the on-face block reduces to
    // a plain simplex projection of the subvector.
    let off_sq: f64 = s
        .iter()
        .enumerate()
        .filter(|(a, _)| !in_set[*a])
        .map(|(_, &p)| p * p)
        .sum();
    let sub: Vec<f64> = br_set.iter().map(|&a| s[a]).collect();
    let proj = project_onto_simplex(&sub);
    let on_sq: f64 = sub.iter().zip(&proj).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((off_sq + on_sq).sqrt())
}

fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot_row =
            (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[pivot_row][col].abs() < PIVOT_TOL {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in 0..n {
            if row != col {
                let factor = a[row][col] / a[col][col];
                if factor != 0.0 {
                    let pivot_row_vals: Vec<f64> = a[col][col..n].to_vec();
                    for (k, pivot_val) in (col..n).zip(pivot_row_vals) {
                        a[row][k] -= factor * pivot_val;
                    }
                    b[row] -= factor * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Solves `a x = b` exactly when square, otherwise in the least-squares
/// sense; rejects solutions whose residual exceeds `DEFAULT_BR_TOL`.
fn solve_indifference(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let rows = a.len();
    let cols = a.first()?.len();
    let x = if rows == cols {
        solve_square(a.to_vec(), b.to_vec())?
    } else {
        // Normal equations are adequate at these sizes (<= 8 unknowns).
        let mut ata = vec![vec![0.0; cols]; cols];
        let mut atb = vec![0.0; cols];
        for r in 0..rows {
            for i in 0..cols {
                atb[i] += a[r][i] * b[r];
                for j in 0..cols {
                    ata[i][j] += a[r][i] * a[r][j];
                }
            }
        }
        solve_square(ata, atb)?
    };
    for r in 0..rows {
        let lhs: f64 = a[r].iter().zip(&x).map(|(c, v)| c * v).sum();
        if (lhs - b[r]).abs() > DEFAULT_BR_TOL {
            return None;
        }
    }
    Some(x)
}

/// Checks that no player has a pure deviation gaining more than `tol`.
pub fn is_equilibrium(
    game: &NormalFormGame,
    profile: &MixedProfile,
    tol: f64,
) -> Result<bool, GameError> {
    for player in 0..game.num_players() {
        let value = expected_payoff(game, profile, player)?;
        let payoffs = pure_payoff_vector(game, profile, player)?;
        if payoffs.iter().any(|&v| v > value + tol) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn nonempty_subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (1u32..(1 << n)).map(move |mask| (0..n).filter(|&a| mask & (1 << a) != 0).collect())
}

/// All Nash equilibria of a two-player game by support enumeration.
///
/// Candidate support pairs of equal size are tried first, then unequal
/// pairs (these only matter for degenerate games). Each candidate solves
/// the opponent-indifference linear system, and survives only with
/// nonnegative probabilities and no profitable pure deviation. The result
/// is deduplicated at 1e-7 L-infinity distance.
pub fn support_enumeration_2p(game: &NormalFormGame) -> Result<Vec<MixedProfile>, GameError> {
    if game.num_players() != 2 {
        return Err(GameError::UnsupportedGame(format!(
            "support enumeration handles exactly 2 players, game has {}",
            game.num_players()
        )));
    }
    if game.action_counts.iter().any(|&n| n > 8) {
        return Err(GameError::UnsupportedGame(
            "support enumeration is guarded to at most 8 actions per player".into(),
        ));
    }
    let (n0, n1) = (game.action_counts[0], game.action_counts[1]);
    let supports0: Vec<Vec<usize>> = nonempty_subsets(n0).collect();
    let supports1: Vec<Vec<usize>> = nonempty_subsets(n1).collect();
    let mut pairs: Vec<(&Vec<usize>, &Vec<usize>)> = Vec::new();
    for s0 in &supports0 {
        for s1 in &supports1 {
            pairs.push((s0, s1));
        }
    }
    pairs.sort_by_key(|(s0, s1)| (s0.len() != s1.len(), s0.len(), s1.len()));

    let payoff0 = |a: usize, b: usize| game.payoff(&[a, b], 0);
    let payoff1 = |a: usize, b: usize| game.payoff(&[a, b], 1);
    let mut found: Vec<MixedProfile> = Vec::new();

    for (s0, s1) in pairs {
        // Player 1's mix on s1 must make player 0 indifferent across s0.
        let mut a_rows: Vec<Vec<f64>> = Vec::with_capacity(s0.len());
        let mut b_vec: Vec<f64> = Vec::with_capacity(s0.len());
        for w in s0.windows(2) {
            a_rows.push(
                s1.iter()
                    .map(|&b| payoff0(w[0], b) - payoff0(w[1], b))
                    .collect(),
            );
            b_vec.push(0.0);
        }
        a_rows.push(vec![1.0; s1.len()]);
        b_vec.push(1.0);
        let Some(y) = solve_indifference(&a_rows, &b_vec) else {
            continue;
        };

        // Player 0's mix on s0 must make player 1 indifferent across s1.
        let mut a_rows: Vec<Vec<f64>> = Vec::with_capacity(s1.len());
        let mut b_vec: Vec<f64> = Vec::with_capacity(s1.len());
        for w in s1.windows(2) {
            a_rows.push(
                s0.iter()
                    .map(|&a| payoff1(a, w[0]) - payoff1(a, w[1]))
                    .collect(),
            );
            b_vec.push(0.0);
        }
        a_rows.push(vec![1.0; s0.len()]);
        b_vec.push(1.0);
        let Some(x) = solve_indifference(&a_rows, &b_vec) else {
            continue;
        };

        let expand = |support: &[usize], probs: &[f64], n: usize| -> Option<Vec<f64>> {
            let mut full = vec![0.0; n];
            for (&a, &p) in support.iter().zip(probs) {
                if p < -DEFAULT_BR_TOL {
                    return None;
                }
                full[a] = p.max(0.0);
            }
            let sum: f64 = full.iter().sum();
            if (sum - 1.0).abs() > DEFAULT_BR_TOL {
                return None;
            }
            for p in &mut full {
                *p /= sum;
            }
            Some(full)
        };
        let Some(full0) = expand(s0, &x, n0) else {
            continue;
        };
        let Some(full1) = expand(s1, &y, n1) else {
            continue;
        };
        let candidate = MixedProfile::from_normalized(vec![full0, full1]);
        if !is_equilibrium(game, &candidate, DEFAULT_BR_TOL)? {
            continue;
        }
        if found
            .iter()
            .all(|e| e.linf_distance(&candidate) > DEDUP_TOL)
        {
            found.push(candidate);
        }
    }
    Ok(found)
}

/// Selects which learning dynamics generates a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DynamicsKind {
    /// Simultaneous damped best-response dynamics.
    #[default]
    Br,
    /// Fictitious play against empirical frequencies.
    Fp,
}

/// Simultaneous damped best-response dynamics for `steps` steps. The
/// returned trajectory has `steps + 1` profiles, starting at `init`.
pub fn best_response_dynamics(
    game: &NormalFormGame,
    init: &MixedProfile,
    steps: usize,
    damping: f64,
) -> Result<Vec<MixedProfile>, GameError> {
    if steps == 0 {
        return Err(GameError::InvalidParameter("steps must be >= 1".into()));
    }
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(GameError::InvalidParameter(
            "damping must be in (0, 1]".into(),
        ));
    }
    let mut trajectory = Vec::with_capacity(steps + 1);
    trajectory.push(init.clone());
    for _ in 0..steps {
        let current = trajectory.last().unwrap();
        let mut next = Vec::with_capacity(game.num_players());
        for player in 0..game.num_players() {
            let br = best_response_set(game, current, player, DEFAULT_BR_TOL)?;
            let target = br[0]; // lowest-index tie-break
            let s = &current.strategies[player];
            let mut v: Vec<f64> = s
                .iter()
                .enumerate()
                .map(|(a, &p)| (1.0 - damping) * p + if a == target { damping } else { 0.0 })
                .collect();
            let sum: f64 = v.iter().sum();
            for p in &mut v {
                *p /= sum;
            }
            next.push(v);
        }
        trajectory.push(MixedProfile::from_normalized(next));
    }
    Ok(trajectory)
}

/// Fictitious play from one initial pure action per player. Every player
/// best-responds (lowest-index tie-break) to the opponents' empirical
/// frequencies so far; the step-`t` entry of the result is the empirical
/// mixed profile after `t` plays.
pub fn fictitious_play(
    game: &NormalFormGame,
    init: &[usize],
    steps: usize,
) -> Result<Vec<MixedProfile>, GameError> {
    if steps == 0 {
        return Err(GameError::InvalidParameter("steps must be >= 1".into()));
    }
    if init.len() != game.num_players() {
        return Err(GameError::InvalidProfile(
            "one initial action per player required".into(),
        ));
    }
    for (i, &a) in init.iter().enumerate() {
        if a >= game.action_counts[i] {
            return Err(GameError::InvalidProfile(format!(
                "initial action {a} out of range for player {i}"
            )));
        }
    }
    let players = game.num_players();
    let mut counts: Vec<Vec<u64>> = game.action_counts.iter().map(|&n| vec![0u64; n]).collect();
    for (i, &a) in init.iter().enumerate() {
        counts[i][a] += 1;
    }
    let empirical = |counts: &Vec<Vec<u64>>, total: u64| -> MixedProfile {
        MixedProfile::from_normalized(
            counts
                .iter()
                .map(|c| c.iter().map(|&k| k as f64 / total as f64).collect())
                .collect(),
        )
    };
    let mut trajectory = Vec::with_capacity(steps);
    trajectory.push(empirical(&counts, 1));
    for t in 1..steps as u64 {
        let beliefs = empirical(&counts, t);
        let mut plays = Vec::with_capacity(players);
        for player in 0..players {
            let payoffs = pure_payoff_vector(game, &beliefs, player)?;
            let mut best = 0usize;
            for (a, &v) in payoffs.iter().enumerate() {
                if v > payoffs[best] {
                    best = a;
                }
            }
            plays.push(best);
        }
        for (player, &a) in plays.iter().enumerate() {
            counts[player][a] += 1;
        }
        trajectory.push(empirical(&counts, t + 1));
    }
    Ok(trajectory)
}

/// Robustness summary produced by [`ner_literal`] and optionally augmented
/// by [`ner_epsilon`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NerResult {
    /// Minimum best-response distance over the trajectory.
    pub ner_literal: f64,
    pub argmin_player: usize,
    pub argmin_step: usize,
    pub trajectory_len: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ner_epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

/// Trajectory estimator: `min` over players and steps of the distance from
/// each strategy to its best-response face.
pub fn ner_literal(
    game: &NormalFormGame,
    trajectory: &[MixedProfile],
) -> Result<NerResult, GameError> {
    if trajectory.is_empty() {
        return Err(GameError::InvalidParameter(
            "trajectory must be non-empty".into(),
        ));
    }
    let mut best = f64::INFINITY;
    let (mut argmin_player, mut argmin_step) = (0usize, 0usize);
    for (step, profile) in trajectory.iter().enumerate() {
        for player in 0..game.num_players() {
            let br = best_response_set(game, profile, player, DEFAULT_BR_TOL)?;
            let d = br_distance(profile, player, &br)?;
            if d < best {
                best = d;
                argmin_player = player;
                argmin_step = step;
            }
        }
    }
    Ok(NerResult {
        ner_literal: best,
        argmin_player,
        argmin_step,
        trajectory_len: trajectory.len(),
        ner_epsilon: None,
        epsilon: None,
    })
}

/// Enumerates all compositions of `grid` into `parts` nonnegative integers.
fn for_each_composition(grid: usize, parts: usize, mut f: impl FnMut(&[usize])) {
    let mut current = vec![0usize; parts];
    fn recurse(
        current: &mut Vec<usize>,
        pos: usize,
        remaining: usize,
        f: &mut impl FnMut(&[usize]),
    ) {
        if pos == current.len() - 1 {
            current[pos] = remaining;
            f(current);
            return;
        }
        for k in 0..=remaining {
            current[pos] = k;
            recurse(current, pos + 1, remaining - k, f);
        }
    }
    recurse(&mut current, 0, grid, &mut f);
}

/// Deviation-gain robustness at a verified equilibrium: the minimum
/// Euclidean distance from any player's equilibrium strategy to a grid
/// strategy whose unilateral payoff gain exceeds `epsilon`. Returns
/// [`NO_DEVIATION_SENTINEL`] (`sqrt(2)`) when no grid deviation profits.
pub fn ner_epsilon(
    game: &NormalFormGame,
    equilibrium: &MixedProfile,
    epsilon: f64,
    grid: usize,
) -> Result<f64, GameError> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(GameError::InvalidParameter(
            "epsilon must be positive".into(),
        ));
    }
    if grid < 2 {
        return Err(GameError::InvalidParameter("grid must be >= 2".into()));
    }
    if !is_equilibrium(game, equilibrium, EQUILIBRIUM_VERIFY_TOL)? {
        return Err(GameError::NotAnEquilibrium(format!(
            "a pure deviation gains more than {EQUILIBRIUM_VERIFY_TOL}"
        )));
    }
    let mut best = NO_DEVIATION_SENTINEL;
    let mut any_profitable = false;
    for player in 0..game.num_players() {
        let base = expected_payoff(game, equilibrium, player)?;
        // Unilateral payoff is linear in the deviating player's own mix.
        let payoffs = pure_payoff_vector(game, equilibrium, player)?;
        let s = &equilibrium.strategies()[player];
        for_each_composition(grid, s.len(), |composition| {
            let mut gain = -base;
            let mut dist_sq = 0.0;
            for (a, &k) in composition.iter().enumerate() {
                let p = k as f64 / grid as f64;
                gain += p * payoffs[a];
                dist_sq += (p - s[a]) * (p - s[a]);
            }
            if gain > epsilon {
                let d = dist_sq.sqrt();
                if !any_profitable || d < best {
                    best = d;
                }
                any_profitable = true;
            }
        });
    }
    Ok(best)
}
