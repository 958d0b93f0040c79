use crate::error::{Error, Result};

/// Width of the smallest (top) layer.
///
/// Balanced corpora use `⌈1.5K⌉`. Strongly imbalanced ones use
/// `30·⌈N / n_smallest⌉` when the smallest class size is known, and
/// `min(300, ⌊N/2⌋)` otherwise.
pub fn terminal_width(n: usize, k: usize, imbalanced: bool, n_smallest: Option<usize>) -> usize {
    if imbalanced {
        match n_smallest {
            Some(nz) if nz > 0 => 30 * n.div_ceil(nz),
            _ => 300.min(n / 2),
        }
    } else {
        (3 * k).div_ceil(2)
    }
}

/// Layer widths from bottom to top: `k_1 = ⌊N/2⌋`, `k_l = ⌊δ·k_{l−1}⌋`,
/// stopping before the first width that falls below the terminal width
/// (or right after a width equal to it).
///
/// `k_top` overrides the terminal width. The terminal width is clamped to
/// `k_1`, so the schedule always has at least one layer.
pub fn layer_widths(
    n: usize,
    k: usize,
    delta: f64,
    imbalanced: bool,
    n_smallest: Option<usize>,
    k_top: Option<usize>,
) -> Result<Vec<usize>> {
    if n <= 2 * k {
        return Err(Error::CorpusTooSmall { n, k });
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::invalid(format!(
            "delta must lie in [0, 1), got {delta}"
        )));
    }
    let first = n / 2;
    let target = k_top
        .unwrap_or_else(|| terminal_width(n, k, imbalanced, n_smallest))
        .clamp(1, first);
    let mut widths = vec![first];
    let mut last = first;
    while last > target {
        let next = (delta * last as f64).floor() as usize;
        if next < target {
            break;
        }
        widths.push(next);
        last = next;
    }
    Ok(widths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_thousand_docs() {
        assert_eq!(
            layer_widths(1000, 20, 0.5, false, None, None).unwrap(),
            [500, 250, 125, 62, 31]
        );
    }

    #[test]
    fn balanced_hundred_docs() {
        assert_eq!(
            layer_widths(100, 3, 0.5, false, None, None).unwrap(),
            [50, 25, 12, 6]
        );
    }

    #[test]
    fn zero_delta_is_single_layer() {
        assert_eq!(layer_widths(100, 3, 0.0, false, None, None).unwrap(), [50]);
    }

    #[test]
    fn exact_hit_stops() {
        // 1.5 * 4 = 6 and 48 -> 24 -> 12 -> 6
        assert_eq!(
            layer_widths(96, 4, 0.5, false, None, None).unwrap(),
            [48, 24, 12, 6]
        );
    }

    #[test]
    fn imbalanced_terminal_widths() {
        assert_eq!(terminal_width(1000, 5, true, Some(40)), 30 * 25);
        assert_eq!(terminal_width(1000, 5, true, None), 300);
        assert_eq!(terminal_width(100, 5, true, None), 50);
        // 750 exceeds k_1 = 500 and is clamped: a single layer.
        assert_eq!(
            layer_widths(1000, 5, 0.5, true, Some(40), None).unwrap(),
            [500]
        );
        assert_eq!(
            layer_widths(2000, 5, 0.5, true, None, None).unwrap(),
            [1000, 500]
        );
    }

    #[test]
    fn override_and_errors() {
        assert_eq!(
            layer_widths(100, 3, 0.5, false, None, Some(20)).unwrap(),
            [50, 25]
        );
        assert!(matches!(
            layer_widths(6, 3, 0.5, false, None, None),
            Err(Error::CorpusTooSmall { .. })
        ));
        assert!(layer_widths(100, 3, 1.0, false, None, None).is_err());
        assert!(layer_widths(100, 3, -0.1, false, None, None).is_err());
    }
}
