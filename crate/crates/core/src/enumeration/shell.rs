//! Ranking of integer tuples by shells of bounded denominator.
//!
//! Every slot draws from an ordered list of reduced fractions. Level `Q`
//! holds the tuples whose largest denominator is exactly `Q`; inside a level
//! tuples are ordered lexicographically by list position. The flat index of
//! a tuple is `total(Q - 1)` plus its rank inside level `Q`, where
//! `total(Q)` is the number of tuples with every denominator `<= Q`.

use crate::states::gcd;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SlotKind {
    /// `p/q` in `[0, 1]`: `0/1, 1/1, 1/2, 1/3, 2/3, 1/4, 3/4, ...`
    Modulus,
    /// `r/s` in `[0, 1)`: `0/1, 1/2, 1/3, 2/3, 1/4, 3/4, ...`
    Phase,
    /// A fixed number of choices, all at denominator 1.
    Selector(u64),
}

pub(crate) fn totient(mut n: u64) -> u64 {
    let mut result = n;
    let mut f = 2;
    while f * f <= n {
        if n % f == 0 {
            while n % f == 0 {
                n /= f;
            }
            result -= result / f;
        }
        f += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// Number of reduced fractions `k/den` with `1 <= k < den` (and `0/1`, `1/1`
/// handled by the callers).
fn proper_count(den: u64) -> u64 {
    if den == 1 {
        0
    } else {
        totient(den)
    }
}

impl SlotKind {
    /// Number of list entries with denominator `<= q`.
    pub(crate) fn size(self, q: u64) -> u64 {
        if q == 0 {
            return 0;
        }
        let proper: u64 = (2..=q).map(proper_count).sum();
        match self {
            SlotKind::Modulus => 2 + proper,
            SlotKind::Phase => 1 + proper,
            SlotKind::Selector(c) => c,
        }
    }

    /// Fraction `(numerator, denominator)` at list position `pos`.
    pub(crate) fn fraction_at(self, pos: u64) -> (u64, u64) {
        let head = match self {
            SlotKind::Selector(_) => return (pos, 1),
            SlotKind::Modulus => 2,
            SlotKind::Phase => 1,
        };
        if pos < head {
            return (pos, 1);
        }
        let mut rest = pos - head;
        let mut den = 2;
        loop {
            let count = proper_count(den);
            if rest < count {
                let num = (1..den)
                    .filter(|&k| gcd(k, den) == 1)
                    .nth(rest as usize)
                    .expect("position within the denominator block");
                return (num, den);
            }
            rest -= count;
            den += 1;
        }
    }

    /// List position of a reduced fraction, or `None` when the fraction is
    /// not in the list (unreduced or out of range).
    pub(crate) fn position_of(self, num: u64, den: u64) -> Option<u64> {
        match self {
            SlotKind::Selector(c) => return (den == 1 && num < c).then_some(num),
            SlotKind::Modulus if den == 1 => return (num <= 1).then_some(num),
            SlotKind::Phase if den == 1 => return (num == 0).then_some(0),
            _ => {}
        }
        if den == 0 || num == 0 || num >= den || gcd(num, den) != 1 {
            return None;
        }
        let offset = self.size(den - 1);
        let within = (1..num).filter(|&k| gcd(k, den) == 1).count() as u64;
        Some(offset + within)
    }

    pub(crate) fn denominator_at(self, pos: u64) -> u64 {
        self.fraction_at(pos).1
    }
}

/// A fixed sequence of slots with shell ranking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Shell {
    slots: Vec<SlotKind>,
}

impl Shell {
    pub(crate) fn new(slots: Vec<SlotKind>) -> Self {
        Self { slots }
    }

    #[cfg(test)]
    pub(crate) fn slots(&self) -> &[SlotKind] {
        &self.slots
    }

    fn graded(&self) -> bool {
        self.slots
            .iter()
            .any(|s| !matches!(s, SlotKind::Selector(_)))
    }

    /// Number of tuples with every denominator `<= q` (saturating).
    pub(crate) fn total(&self, q: u64) -> u128 {
        self.slots
            .iter()
            .fold(1u128, |acc, s| acc.saturating_mul(s.size(q) as u128))
    }

    fn suffix_products(&self, q: u64) -> Vec<u128> {
        let mut out = vec![1u128; self.slots.len() + 1];
        for j in (0..self.slots.len()).rev() {
            out[j] = out[j + 1].saturating_mul(self.slots[j].size(q) as u128);
        }
        out
    }

    /// Level (largest denominator) containing `index`, or `None` past the end
    /// of a finite shell.
    pub(crate) fn level_of(&self, index: u64) -> Option<u64> {
        let index = index as u128;
        let mut q = 1;
        loop {
            if index < self.total(q) {
                return Some(q);
            }
            if !self.graded() {
                return None;
            }
            q += 1;
        }
    }

    /// List positions of the tuple at `index`.
    pub(crate) fn unrank(&self, index: u64) -> Option<Vec<u64>> {
        let q = self.level_of(index)?;
        let mut r = index as u128 - self.total(q - 1);
        let hi = self.suffix_products(q);
        let lo = self.suffix_products(q - 1);
        let mut has_top = false;
        let mut out = Vec::with_capacity(self.slots.len());
        for (j, slot) in self.slots.iter().enumerate() {
            let rest_hi = hi[j + 1];
            let low_count = if matches!(slot, SlotKind::Selector(_)) && q > 1 {
                slot.size(q) as u128
            } else {
                slot.size(q - 1) as u128
            };
            let pos = if has_top {
                let pos = r / rest_hi;
                r %= rest_hi;
                pos
            } else {
                let completions = rest_hi - lo[j + 1];
                let block_low = low_count * completions;
                if r < block_low {
                    let pos = r / completions;
                    r %= completions;
                    pos
                } else {
                    r -= block_low;
                    has_top = true;
                    let pos = low_count + r / rest_hi;
                    r %= rest_hi;
                    pos
                }
            };
            out.push(pos as u64);
        }
        Some(out)
    }

    /// Inverse of [`Shell::unrank`].
    pub(crate) fn rank(&self, positions: &[u64]) -> Option<u64> {
        if positions.len() != self.slots.len() {
            return None;
        }
        let q = self
            .slots
            .iter()
            .zip(positions)
            .map(|(s, &p)| s.denominator_at(p))
            .max()
            .unwrap_or(1);
        let hi = self.suffix_products(q);
        let lo = self.suffix_products(q - 1);
        let mut r: u128 = 0;
        let mut has_top = false;
        for (j, (slot, &pos)) in self.slots.iter().zip(positions).enumerate() {
            if pos as u128 >= slot.size(q) as u128 {
                return None;
            }
            let pos = pos as u128;
            let rest_hi = hi[j + 1];
            let low_count = if matches!(slot, SlotKind::Selector(_)) && q > 1 {
                slot.size(q) as u128
            } else {
                slot.size(q - 1) as u128
            };
            if has_top {
                r += pos * rest_hi;
            } else {
                let completions = rest_hi - lo[j + 1];
                if pos < low_count {
                    r += pos * completions;
                } else {
                    r += low_count * completions + (pos - low_count) * rest_hi;
                    has_top = true;
                }
            }
        }
        u64::try_from(self.total(q - 1) + r).ok()
    }
}
