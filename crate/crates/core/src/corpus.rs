//! The figure sources that ship with the crate.
//!
//! Each source is a TikZ picture followed by its caption, exactly as
//! published. Only these seven figures carry coordinates; the rest of the
//! published catalog has no embedded drawing data and cannot be re-verified.

use std::sync::OnceLock;

use regex::Regex;

pub const FIG02: &str = include_str!("../corpus/fig02.tex");
pub const FIG09: &str = include_str!("../corpus/fig09.tex");
pub const FIG10: &str = include_str!("../corpus/fig10.tex");
pub const FIG11: &str = include_str!("../corpus/fig11.tex");
pub const FIG13: &str = include_str!("../corpus/fig13.tex");
pub const FIG15: &str = include_str!("../corpus/fig15.tex");
pub const FIG16: &str = include_str!("../corpus/fig16.tex");

/// Which of the two published tables a figure belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Part {
    /// 4-regular graphs.
    FourRegular,
    /// (2,4)-regular graphs with exactly two vertices of degree 2.
    TwoFourRegular,
}

#[derive(Clone, Copy, Debug)]
pub struct Figure {
    pub id: &'static str,
    pub part: Part,
    pub source: &'static str,
}

impl Figure {
    /// Vertex count stated in the caption.
    pub fn caption_vertices(&self) -> Option<usize> {
        caption_vertex_count(self.source)
    }
}

/// The embedded figures, in publication order.
pub fn figures() -> &'static [Figure] {
    const FIGURES: &[Figure] = &[
        Figure { id: "fig02", part: Part::FourRegular, source: FIG02 },
        Figure { id: "fig09", part: Part::TwoFourRegular, source: FIG09 },
        Figure { id: "fig10", part: Part::TwoFourRegular, source: FIG10 },
        Figure { id: "fig11", part: Part::TwoFourRegular, source: FIG11 },
        Figure { id: "fig13", part: Part::TwoFourRegular, source: FIG13 },
        Figure { id: "fig15", part: Part::TwoFourRegular, source: FIG15 },
        Figure { id: "fig16", part: Part::TwoFourRegular, source: FIG16 },
    ];
    FIGURES
}

pub fn figure(id: &str) -> Option<&'static Figure> {
    figures().iter().find(|f| f.id == id)
}

/// Parses "... with N vertices" out of a `\caption{...}`.
pub fn caption_vertex_count(source: &str) -> Option<usize> {
    static PATTERN: OnceLock<Regex> = OnceLock::new();
    let re = PATTERN.get_or_init(|| {
        Regex::new(r"\\caption\{[^}]*?(\d+)\s+vertices").expect("valid pattern")
    });
    re.captures(source)?.get(1)?.as_str().parse().ok()
}

/// Published example counts per vertex count, 4-regular table.
pub const PUBLISHED_FOUR_REGULAR: &[(usize, usize)] = &[
    (63, 3),
    (64, 1),
    (65, 3),
    (66, 9),
    (67, 11),
    (68, 4),
    (69, 3),
    (70, 5),
];

/// Published example counts per vertex count, (2,4)-regular table.
pub const PUBLISHED_TWO_FOUR_REGULAR: &[(usize, usize)] = &[
    (22, 2),
    (30, 3),
    (31, 1),
    (34, 6),
    (35, 3),
    (36, 8),
    (37, 3),
    (38, 2),
    (39, 4),
    (40, 14),
    (41, 20),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn captions() {
        let counts: Vec<_> = figures().iter().map(|f| f.caption_vertices()).collect();
        assert_eq!(
            counts,
            [64, 22, 30, 31, 35, 37, 38].map(Some).to_vec()
        );
        assert_eq!(caption_vertex_count("no caption here"), None);
    }

    #[test]
    fn two_four_table_sums_to_sixty_six() {
        let total: usize = PUBLISHED_TWO_FOUR_REGULAR.iter().map(|&(_, c)| c).sum();
        assert_eq!(total, 66);
    }
}
