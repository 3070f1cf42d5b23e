//! Batch text → scene → joint → bundle processing for a questions file and
//! a scenes file.

use std::collections::HashMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::diagnostics::Diagnostic;
use crate::embed::{embed, export_bundle, BundleFormat, EmbedError, EmbeddingProvider};
use crate::grounding::{ground, GroundError};
use crate::lexicon::Lexicon;
use crate::scene::{parse_scene, SceneDocument};
use crate::text::{QuestionRecord, TextError, TextParser};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("question {0} has no image_index")]
    MissingImageIndex(usize),
    #[error("question {question} refers to image_index {image_index}, which is not in the scenes file")]
    UnknownScene { question: usize, image_index: usize },
    #[error("duplicate image_index {0} in scenes file")]
    DuplicateScene(usize),
    #[error("question {question}: {source}")]
    Text { question: usize, source: TextError },
    #[error("question {question}: {source}")]
    Ground { question: usize, source: GroundError },
    #[error("question {question}: {source}")]
    Embed { question: usize, source: EmbedError },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

type QuestionOutput = (Vec<OutputFile>, Vec<Diagnostic>);

pub struct PipelineOptions<'a> {
    pub provider: &'a dyn EmbeddingProvider,
    pub format: BundleFormat,
    pub directed: bool,
    pub prune: bool,
    pub jobs: usize,
}

/// A file to write, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub path: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    /// Sorted by path.
    pub files: Vec<OutputFile>,
    /// Scene diagnostics by scene order, then question diagnostics by
    /// question order.
    pub diagnostics: Vec<Diagnostic>,
}

fn question_id(index: usize) -> String {
    format!("q{index:06}")
}

/// Runs every question against its scene. Output is independent of
/// `jobs`.
///
/// Layout: `gt/scene_<image_index>.json`, `gs/<qid>.json`, `gu/<qid>.json`
/// and `bundles/<qid>.json` or `.bin`.
pub fn run_pipeline(
    lexicon: &Lexicon,
    questions: &[QuestionRecord],
    scenes: &[SceneDocument],
    options: &PipelineOptions<'_>,
) -> Result<PipelineOutput, PipelineError> {
    let mut by_image = HashMap::with_capacity(scenes.len());
    for (pos, scene) in scenes.iter().enumerate() {
        if by_image.insert(scene.image_index, pos).is_some() {
            return Err(PipelineError::DuplicateScene(scene.image_index));
        }
    }
    let mut scene_of = Vec::with_capacity(questions.len());
    for q in questions {
        let image_index = q.image_index.ok_or(PipelineError::MissingImageIndex(q.index))?;
        let pos = by_image
            .get(&image_index)
            .copied()
            .ok_or(PipelineError::UnknownScene {
                question: q.index,
                image_index,
            })?;
        scene_of.push(pos);
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs.max(1))
        .build()
        .map_err(|e| PipelineError::Pool(e.to_string()))?;
    let parser = TextParser::new(lexicon);
    let ext = match options.format {
        BundleFormat::Json => "json",
        BundleFormat::FlatBinary => "bin",
    };

    pool.install(|| {
        let scene_parses: Vec<_> = scenes.par_iter().map(|s| parse_scene(s, options.prune)).collect();

        let per_question: Vec<Result<QuestionOutput, PipelineError>> = questions
            .par_iter()
            .zip(scene_of.par_iter())
            .map(|(q, &pos)| {
                let text = parser.parse(&q.text).map_err(|source| PipelineError::Text {
                    question: q.index,
                    source,
                })?;
                let gt = &scene_parses[pos].graph;
                let joint = ground(&text.graph, gt).map_err(|source| PipelineError::Ground {
                    question: q.index,
                    source,
                })?;
                let mut bundle =
                    embed(&joint.graph, options.provider, options.directed).map_err(|source| {
                        PipelineError::Embed {
                            question: q.index,
                            source,
                        }
                    })?;
                let id = question_id(q.index);
                bundle.source = id.clone();
                bundle.group = q
                    .family
                    .map(|f| format!("family_{f}"))
                    .or_else(|| q.split.clone());
                let files = vec![
                    OutputFile {
                        path: format!("gs/{id}.json"),
                        bytes: text.graph.to_json_bytes(),
                    },
                    OutputFile {
                        path: format!("gu/{id}.json"),
                        bytes: joint.graph.to_json_bytes(),
                    },
                    OutputFile {
                        path: format!("bundles/{id}.{ext}"),
                        bytes: export_bundle(&bundle, options.format),
                    },
                ];
                let mut diagnostics = text.diagnostics;
                diagnostics.extend(joint.diagnostics);
                Ok((files, diagnostics))
            })
            .collect();

        let mut files = Vec::new();
        let mut diagnostics = Vec::new();
        for (scene, parse) in scenes.iter().zip(&scene_parses) {
            files.push(OutputFile {
                path: format!("gt/scene_{:06}.json", scene.image_index),
                bytes: parse.graph.to_json_bytes(),
            });
            diagnostics.extend(parse.diagnostics.iter().cloned());
        }
        for item in per_question {
            let (f, d) = item?;
            files.extend(f);
            diagnostics.extend(d);
        }
        files.sort_by(|a, b| a.path.cmp(&b.path));
        Ok(PipelineOutput { files, diagnostics })
    })
}
