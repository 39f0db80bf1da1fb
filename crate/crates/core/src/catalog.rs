//! The full pipeline over a corpus, and the comparison with the published
//! example counts.
//!
//! Each figure source is ingested, split into components, normalized with
//! the figure-wide edge length, refined, verified, and analyzed for rigidity.
//! Verified graphs are then grouped into congruence classes and tallied per
//! vertex count.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::congruence::{dedup, CongruenceError, EquivalenceClass, DEFAULT_CONGRUENCE_TOLERANCE};
use crate::corpus::{caption_vertex_count, Part, PUBLISHED_FOUR_REGULAR, PUBLISHED_TWO_FOUR_REGULAR};
use crate::ingest::{ingest_figure, normalize, IngestError, IngestOptions};
use crate::mgf::{read_mgf, FormatError};
use crate::model::{connected_components, Graph, ModelError, RegularityClass};
use crate::refine::{refine, RefineError, RefineOptions, RefinementTrace};
use crate::report::GraphRecord;
use crate::rigidity::{analyze_rigidity, RigidityError, RigidityReport};
use crate::verify::{degree2_distance, verify_matchstick, VerificationPolicy, VerificationReport};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineOptions {
    pub ingest: IngestOptions,
    pub refine: RefineOptions,
    pub policy: VerificationPolicy,
    pub congruence_tolerance: f64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            ingest: IngestOptions::default(),
            refine: RefineOptions::default(),
            policy: VerificationPolicy::default(),
            congruence_tolerance: DEFAULT_CONGRUENCE_TOLERANCE,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Refine(#[from] RefineError),
    #[error(transparent)]
    Rigidity(#[from] RigidityError),
    #[error(transparent)]
    Congruence(#[from] CongruenceError),
    #[error("verification failed: {}", describe_failures(.0))]
    Verification(Box<VerificationReport>),
}

fn describe_failures(r: &VerificationReport) -> String {
    r.failures
        .iter()
        .map(|f| serde_json::to_string(f).unwrap_or_default())
        .collect::<Vec<_>>()
        .join(", ")
}

/// One verified example.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    /// `<figure>/<component>`, e.g. `fig09/0`.
    pub id: String,
    pub figure: String,
    pub index: usize,
    /// Normalized coordinates as read, before refinement.
    pub figure_graph: Graph,
    /// Refined realization.
    pub graph: Graph,
    pub verification: VerificationReport,
    pub rigidity: RigidityReport,
    pub refinement: RefinementTrace,
    pub degree2_distance: Option<f64>,
}

impl CatalogEntry {
    pub fn record(&self) -> GraphRecord {
        GraphRecord::new(&self.id, &self.graph)
            .with_verification(&self.verification)
            .with_rigidity(&self.rigidity)
            .with_refinement(&self.refinement)
            .with_degree2_distance(self.degree2_distance)
    }
}

/// Refine, verify, and analyze one normalized graph.
pub fn process_graph(
    figure: &str,
    index: usize,
    normalized: Graph,
    opts: &PipelineOptions,
) -> Result<CatalogEntry, PipelineError> {
    let (graph, refinement) = refine(&normalized, &opts.refine)?;
    let verification = verify_matchstick(&graph, &opts.policy);
    if !verification.passed() {
        return Err(PipelineError::Verification(Box::new(verification)));
    }
    let rigidity = analyze_rigidity(&graph)?;
    let degree2_distance = match verification.regularity {
        RegularityClass::TwoFourRegular(2) => degree2_distance(&graph).ok(),
        _ => None,
    };
    Ok(CatalogEntry {
        id: format!("{figure}/{index}"),
        figure: figure.to_owned(),
        index,
        figure_graph: normalized,
        graph,
        verification,
        rigidity,
        refinement,
        degree2_distance,
    })
}

/// Ingests figure text into normalized components.
pub fn normalized_components(text: &str, opts: &IngestOptions) -> Result<Vec<Graph>, PipelineError> {
    ingest_figure(text, opts)?
        .into_iter()
        .map(|c| {
            let scale = c.scale();
            normalize(&c, scale).map_err(PipelineError::from)
        })
        .collect()
}

/// What a corpus source looks like before processing.
#[derive(Clone, Debug)]
pub struct Source {
    pub id: String,
    pub kind: SourceKind,
    pub text: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceKind {
    /// Figure text with `(x,y) -- (x,y)` segments.
    Figure,
    /// A unit-scale MGF file.
    Mgf,
}

impl Source {
    pub fn figure(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            kind: SourceKind::Figure,
            text: text.into(),
        }
    }

    fn components(&self, opts: &IngestOptions) -> Result<Vec<Graph>, PipelineError> {
        match self.kind {
            SourceKind::Figure => normalized_components(&self.text, opts),
            SourceKind::Mgf => Ok(connected_components(&read_mgf(&self.text)?)),
        }
    }
}

/// Reads every regular, non-hidden file of a directory, sorted by name.
/// `.mgf` files are graphs; anything else is treated as figure text.
pub fn read_corpus_dir(dir: &Path) -> Result<Vec<Result<Source, PipelineError>>, PipelineError> {
    fn io(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
        move |source| PipelineError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .filter(|p| !p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with('.')))
        .collect();
    paths.sort();
    Ok(paths
        .into_iter()
        .map(|path| {
            let text = std::fs::read_to_string(&path).map_err(io(&path))?;
            let id = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let kind = match path.extension().and_then(|e| e.to_str()) {
                Some("mgf") => SourceKind::Mgf,
                _ => SourceKind::Figure,
            };
            Ok(Source { id, kind, text })
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FailureRecord {
    pub id: String,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FigureSummary {
    pub id: String,
    pub caption_vertices: Option<usize>,
    pub components: usize,
    pub component_vertices: Vec<usize>,
}

/// A component whose vertex count differs from its figure caption.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CaptionMismatch {
    pub id: String,
    pub caption_vertices: usize,
    pub parsed_vertices: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TallyStatus {
    /// Published, by-caption and by-vertex-count counts agree.
    Reproduced,
    /// By-caption count agrees but some graph has a different vertex count
    /// than its caption.
    CaptionMismatch,
    Differs,
    /// No figure in the corpus covers this row.
    NotEmbedded,
    /// Found in the corpus but absent from the published table.
    Unpublished,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TallyRow {
    pub vertices: usize,
    pub published: Option<usize>,
    /// Distinct classes among graphs drawn in figures captioned with this
    /// vertex count.
    pub by_caption: usize,
    /// Distinct classes among graphs with exactly this many vertices.
    pub by_vertex_count: usize,
    pub status: TallyStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CatalogSummary {
    pub entries: Vec<GraphRecord>,
    pub failures: Vec<FailureRecord>,
    pub figures: Vec<FigureSummary>,
    pub caption_mismatches: Vec<CaptionMismatch>,
    pub classes: Vec<EquivalenceClass>,
    pub four_regular: Vec<TallyRow>,
    pub two_four_regular: Vec<TallyRow>,
}

/// Catalog output plus the entries themselves, for callers that need the
/// geometry.
#[derive(Clone, Debug)]
pub struct Catalog {
    pub entries: Vec<CatalogEntry>,
    pub summary: CatalogSummary,
}

impl Catalog {
    pub fn entry(&self, id: &str) -> Option<&CatalogEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn has_failures(&self) -> bool {
        !self.summary.failures.is_empty()
    }
}

fn part_of(class: &RegularityClass) -> Option<Part> {
    match class {
        RegularityClass::FourRegular => Some(Part::FourRegular),
        RegularityClass::TwoFourRegular(2) => Some(Part::TwoFourRegular),
        _ => None,
    }
}

/// Runs the pipeline over every source.
pub fn build_catalog(
    sources: Vec<Result<Source, PipelineError>>,
    opts: &PipelineOptions,
) -> Result<Catalog, PipelineError> {
    let mut entries = Vec::new();
    let mut failures = Vec::new();
    let mut figures = Vec::new();
    let mut caption_mismatches = Vec::new();

    for (k, source) in sources.into_iter().enumerate() {
        let source = match source {
            Ok(s) => s,
            Err(e) => {
                failures.push(FailureRecord {
                    id: format!("#{k}"),
                    error: e.to_string(),
                });
                continue;
            }
        };
        let components = match source.components(&opts.ingest) {
            Ok(c) => c,
            Err(e) => {
                failures.push(FailureRecord {
                    id: source.id.clone(),
                    error: e.to_string(),
                });
                continue;
            }
        };
        let caption_vertices = match source.kind {
            SourceKind::Figure => caption_vertex_count(&source.text),
            SourceKind::Mgf => None,
        };
        figures.push(FigureSummary {
            id: source.id.clone(),
            caption_vertices,
            components: components.len(),
            component_vertices: components.iter().map(Graph::vertex_count).collect(),
        });
        for (index, g) in components.into_iter().enumerate() {
            if let Some(caption) = caption_vertices {
                if caption != g.vertex_count() {
                    caption_mismatches.push(CaptionMismatch {
                        id: format!("{}/{index}", source.id),
                        caption_vertices: caption,
                        parsed_vertices: g.vertex_count(),
                    });
                }
            }
            match process_graph(&source.id, index, g, opts) {
                Ok(entry) => entries.push(entry),
                Err(e) => failures.push(FailureRecord {
                    id: format!("{}/{index}", source.id),
                    error: e.to_string(),
                }),
            }
        }
    }

    let items: Vec<(&str, &Graph)> = entries.iter().map(|e| (e.id.as_str(), &e.graph)).collect();
    let classes = dedup(&items, opts.congruence_tolerance)?;

    let caption_of: BTreeMap<&str, Option<usize>> =
        figures.iter().map(|f| (f.id.as_str(), f.caption_vertices)).collect();
    let by_id: BTreeMap<&str, &CatalogEntry> = entries.iter().map(|e| (e.id.as_str(), e)).collect();
    let mut by_count: BTreeMap<(Part, usize), usize> = BTreeMap::new();
    let mut by_caption: BTreeMap<(Part, usize), usize> = BTreeMap::new();
    for class in &classes {
        let rep = by_id[class.representative.as_str()];
        let Some(part) = part_of(&rep.verification.regularity) else {
            continue;
        };
        *by_count.entry((part, rep.graph.vertex_count())).or_default() += 1;
        if let Some(Some(caption)) = caption_of.get(rep.figure.as_str()) {
            *by_caption.entry((part, *caption)).or_default() += 1;
        }
    }
    let rows = |part: Part, published: &[(usize, usize)]| -> Vec<TallyRow> {
        let mut counts: BTreeSet<usize> = published.iter().map(|&(v, _)| v).collect();
        counts.extend(by_count.keys().filter(|k| k.0 == part).map(|k| k.1));
        counts.extend(by_caption.keys().filter(|k| k.0 == part).map(|k| k.1));
        counts
            .into_iter()
            .map(|vertices| {
                let published = published.iter().find(|&&(v, _)| v == vertices).map(|&(_, c)| c);
                let by_caption = by_caption.get(&(part, vertices)).copied().unwrap_or(0);
                let by_vertex_count = by_count.get(&(part, vertices)).copied().unwrap_or(0);
                let status = match published {
                    None => TallyStatus::Unpublished,
                    Some(_) if by_caption == 0 && by_vertex_count == 0 => TallyStatus::NotEmbedded,
                    Some(p) if p == by_caption && p == by_vertex_count => TallyStatus::Reproduced,
                    Some(p) if p == by_caption => TallyStatus::CaptionMismatch,
                    Some(_) => TallyStatus::Differs,
                };
                TallyRow {
                    vertices,
                    published,
                    by_caption,
                    by_vertex_count,
                    status,
                }
            })
            .collect()
    };
    let four_regular = rows(Part::FourRegular, PUBLISHED_FOUR_REGULAR);
    let two_four_regular = rows(Part::TwoFourRegular, PUBLISHED_TWO_FOUR_REGULAR);

    let summary = CatalogSummary {
        entries: entries.iter().map(CatalogEntry::record).collect(),
        failures,
        figures,
        caption_mismatches,
        classes,
        four_regular,
        two_four_regular,
    };
    Ok(Catalog { entries, summary })
}

/// Catalog of the figures embedded in this crate.
pub fn embedded_catalog(opts: &PipelineOptions) -> Result<Catalog, PipelineError> {
    let sources = crate::corpus::figures()
        .iter()
        .map(|f| Ok(Source::figure(f.id, f.source)))
        .collect();
    build_catalog(sources, opts)
}

impl CatalogSummary {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }

    /// Plain-text comparison with the published tables.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let section = |out: &mut String, title: &str, rows: &[TallyRow]| {
            let _ = writeln!(out, "{title}");
            let cell = |v: Option<usize>| v.map_or("-".to_owned(), |c| c.to_string());
            let mut lines = vec![
                vec!["vertices".to_owned()],
                vec!["published".to_owned()],
                vec!["by caption".to_owned()],
                vec!["by vertices".to_owned()],
                vec!["status".to_owned()],
            ];
            for r in rows {
                let embedded = r.status != TallyStatus::NotEmbedded;
                lines[0].push(r.vertices.to_string());
                lines[1].push(cell(r.published));
                lines[2].push(if embedded { r.by_caption.to_string() } else { "-".into() });
                lines[3].push(if embedded { r.by_vertex_count.to_string() } else { "-".into() });
                lines[4].push(
                    match r.status {
                        TallyStatus::Reproduced => "ok",
                        TallyStatus::CaptionMismatch => "caption",
                        TallyStatus::Differs => "DIFFERS",
                        TallyStatus::NotEmbedded => "n/e",
                        TallyStatus::Unpublished => "new",
                    }
                    .to_owned(),
                );
            }
            let widths: Vec<usize> = (0..lines[0].len())
                .map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0))
                .collect();
            for line in &lines {
                let cells: Vec<String> = line
                    .iter()
                    .zip(&widths)
                    .enumerate()
                    .map(|(c, (s, &w))| if c == 0 { format!("{s:<w$}") } else { format!("{s:>w$}") })
                    .collect();
                let _ = writeln!(out, "{}", cells.join("  ").trim_end());
            }
            let _ = writeln!(out);
        };
        section(&mut out, "4-regular", &self.four_regular);
        section(&mut out, "(2,4)-regular, two vertices of degree 2", &self.two_four_regular);
        let _ = writeln!(
            out,
            "n/e = not embedded: no coordinates in the corpus for this row; caption = a figure\n\
             contains a graph whose vertex count differs from its caption."
        );
        if !self.figures.is_empty() {
            let _ = writeln!(out, "\nfigures:");
            for f in &self.figures {
                let caption = f.caption_vertices.map_or("-".to_owned(), |c| c.to_string());
                let _ = writeln!(
                    out,
                    "  {:<10} caption {:>3}  components {}  vertices {:?}",
                    f.id, caption, f.components, f.component_vertices
                );
            }
        }
        for m in &self.caption_mismatches {
            let _ = writeln!(
                out,
                "caption mismatch: {} has {} vertices, caption says {}",
                m.id, m.parsed_vertices, m.caption_vertices
            );
        }
        let merged: Vec<_> = self.classes.iter().filter(|c| c.members.len() > 1).collect();
        let _ = writeln!(
            out,
            "\n{} graphs verified, {} congruence classes, {} merged",
            self.entries.len(),
            self.classes.len(),
            merged.len()
        );
        for c in merged {
            let ids: Vec<_> = c.members.iter().map(|m| m.id.as_str()).collect();
            let _ = writeln!(out, "  same example: {}", ids.join(", "));
        }
        for f in &self.failures {
            let _ = writeln!(out, "FAILED {}: {}", f.id, f.error);
        }
        out
    }
}
