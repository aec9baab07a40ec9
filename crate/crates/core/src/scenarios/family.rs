use serde::{Deserialize, Serialize};

use crate::ergodic::Observable;

/// The first `n` real trigonometric polynomials of the fixed enumeration used for the
/// uniform-convergence construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableFamily {
    pub members: Vec<Observable>,
}

impl ObservableFamily {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.members.iter().map(|f| f.label.clone()).collect()
    }

    pub fn max_sup(&self) -> f64 {
        self.members.iter().map(Observable::sup_bound).fold(0.0, f64::max)
    }
}

/// Frequencies `(k, l)`, one per conjugate pair, in enumeration order: by `max(|k|, |l|)`,
/// then by `(l, k)`, over the half-plane `l > 0` or `l = 0, k > 0`.
pub fn frequency_order(radius: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for r in 1..=radius {
        let mut shell: Vec<(i64, i64)> = Vec::new();
        for l in 0..=r {
            for k in -r..=r {
                let upper = l > 0 || k > 0;
                if upper && k.abs().max(l) == r {
                    shell.push((k, l));
                }
            }
        }
        shell.sort_by_key(|&(k, l)| (l, k));
        out.extend(shell);
    }
    out
}

/// Constant first, then `cos` before `sin` for each frequency of [`frequency_order`].
/// Prefix-stable: `enumerate_family(m)` starts with `enumerate_family(n)` for `n ≤ m`.
pub fn enumerate_family(n: usize) -> ObservableFamily {
    let mut members = Vec::with_capacity(n);
    if n > 0 {
        members.push(Observable::constant(1.0));
    }
    let mut radius = 1;
    while members.len() < n {
        // A radius-r shell holds 4r frequencies; regrow until enough pairs exist.
        let freqs = frequency_order(radius);
        members.truncate(1);
        for (k, l) in freqs {
            if members.len() >= n {
                break;
            }
            members.push(Observable::cos(k, l));
            if members.len() < n {
                members.push(Observable::sin(k, l));
            }
        }
        radius += 1;
    }
    ObservableFamily { members }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_members() {
        assert_eq!(enumerate_family(1).labels(), vec!["1"]);
        let f3 = enumerate_family(3);
        assert_eq!(f3.members[1], Observable::cos(1, 0));
        assert_eq!(f3.members[2], Observable::sin(1, 0));
    }

    #[test]
    fn prefix_stable() {
        let f5 = enumerate_family(5);
        let f3 = enumerate_family(3);
        assert_eq!(&f5.members[..3], &f3.members[..]);
        let f40 = enumerate_family(40);
        assert_eq!(&f40.members[..5], &f5.members[..]);
        assert_eq!(f40.len(), 40);
    }

    #[test]
    fn shell_order() {
        assert_eq!(frequency_order(1), vec![(1, 0), (-1, 1), (0, 1), (1, 1)]);
        assert_eq!(frequency_order(2).len(), 4 + 8);
        assert_eq!(enumerate_family(7).members[5], Observable::cos(0, 1));
    }
}
