use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use otkit_core::eval::{corpus_report, DocMeta, DocumentPair};
use otkit_core::ingest::{
    fill_page_text, pair_ground_truth, parse_page_xml_with_warnings, render_pairs, split_corpus,
    transcript_lines, write_page_xml, CorpusManifest, GroundTruthPolicy, SplitRatios,
};
use otkit_core::lm::{NgramModel, RescoreConfig, TrainConfig};
use otkit_core::romanizer::{ExceptionLexicon, GenLimits, Lexicon, OtWord, Romanizer};
use otkit_core::scheme::{SchemeId, SchemeTable};
use otkit_core::text_direction::{reverse_line, ReversalOptions};
use rayon::prelude::*;

use crate::{
    Command, ConvertArgs, EvalArgs, Failure, Io, LmScoreArgs, LmTrainArgs, PrepareArgs,
    ReportFormat, ReverseArgs, RomanizeArgs, SchemeArg, SplitArgs, ValidateArgs, SCHEME_DIR_VAR,
};

pub(crate) fn dispatch(command: Command, io: &mut Io<'_>) -> Result<(), Failure> {
    match command {
        Command::Reverse(a) => reverse(a, io),
        Command::SchemeConvert(a) => scheme_convert(a, io),
        Command::SchemeValidate(a) => scheme_validate(a, io),
        Command::Romanize(a) => romanize(a, io),
        Command::LmTrain(a) => lm_train(a, io),
        Command::LmScore(a) => lm_score(a, io),
        Command::Eval(a) => eval(a, io),
        Command::Prepare(a) => prepare(a, io),
        Command::Split(a) => split(a, io),
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn scheme_id(s: SchemeArg) -> SchemeId {
    match s {
        SchemeArg::Ia => SchemeId::Ia,
        SchemeArg::Loose => SchemeId::Loose,
    }
}

fn scheme_table() -> Result<SchemeTable, Failure> {
    match std::env::var_os(SCHEME_DIR_VAR) {
        Some(dir) => SchemeTable::load_dir(Path::new(&dir))
            .with_context(|| format!("loading scheme data from {SCHEME_DIR_VAR}"))
            .map_err(Failure::Data),
        None => Ok(SchemeTable::builtin()),
    }
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Failure::Data(e.into()))
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Data)
}

/// Applies `f` to every line, keeping line terminators (LF or CRLF) and the
/// presence or absence of a final newline.
fn map_lines(
    text: &str,
    mut f: impl FnMut(&str) -> Result<String, Failure>,
) -> Result<String, Failure> {
    let mut out = String::with_capacity(text.len());
    for piece in text.split_inclusive('\n') {
        let (body, end) = match piece.strip_suffix("\r\n") {
            Some(b) => (b, "\r\n"),
            None => match piece.strip_suffix('\n') {
                Some(b) => (b, "\n"),
                None => (piece, ""),
            },
        };
        out.push_str(&f(body)?);
        out.push_str(end);
    }
    Ok(out)
}

fn reverse(a: ReverseArgs, io: &mut Io<'_>) -> Result<(), Failure> {
    let opts = ReversalOptions {
        mirror_brackets: a.mirror_brackets,
        preserve_digit_runs: !a.no_digit_runs,
    };
    let text = io.read_stdin()?;
    let out = map_lines(&text, |l| Ok(reverse_line(l, &opts)))?;
    io.stdout.write_all(out.as_bytes())?;
    Ok(())
}

fn scheme_convert(a: ConvertArgs, io: &mut Io<'_>) -> Result<(), Failure> {
    let table = scheme_table()?;
    let (from, to) = (scheme_id(a.from), scheme_id(a.to));
    if from == SchemeId::Loose && to == SchemeId::Ia {
        return Err(usage(
            "loose text cannot be converted to IA; diacritics are not recoverable",
        ));
    }
    let text = io.read_stdin()?;
    let out = map_lines(&text, |l| Ok(table.convert_scheme(l, &from, &to)?))?;
    io.stdout.write_all(out.as_bytes())?;
    Ok(())
}

fn scheme_validate(a: ValidateArgs, io: &mut Io<'_>) -> Result<(), Failure> {
    let table = scheme_table()?;
    let text = io.read_stdin()?;
    let diagnostics = table.validate_scheme_text(&text, &scheme_id(a.scheme))?;
    for d in &diagnostics {
        writeln!(io.stdout, "{}:{}\t{}", d.line, d.column, d.grapheme)?;
    }
    if diagnostics.is_empty() {
        Ok(())
    } else {
        Err(Failure::Data(anyhow!(
            "{} grapheme(s) outside the {} alphabet",
            diagnostics.len(),
            scheme_id(a.scheme)
        )))
    }
}

fn romanize(a: RomanizeArgs, io: &mut Io<'_>) -> Result<(), Failure> {
    let rescore = RescoreConfig::new(a.alpha).map_err(|e| usage(e.to_string()))?;
    if a.beam == 0 || a.max_candidates == 0 {
        return Err(usage("--beam and --max-candidates must be positive"));
    }
    let table = scheme_table()?;
    let lexicon = match &a.lexicon {
        Some(p) => Lexicon::load(p)?,
        None => Lexicon::default(),
    };
    let mut exceptions = ExceptionLexicon::builtin();
    if let Some(p) = &a.exceptions {
        let extra = ExceptionLexicon::load(p)?;
        for (ot, mt) in extra.iter() {
            exceptions.insert(ot, mt);
        }
    }
    let model = a.model.as_deref().map(NgramModel::load).transpose()?;
    let romanizer = Romanizer {
        table: &table,
        lexicon: &lexicon,
        exceptions: &exceptions,
        model: model.as_ref(),
        rescore,
    };

    let text = io.read_stdin()?;
    let words: Vec<&str> = text.split_whitespace().collect();
    let parsed = words
        .iter()
        .map(|w| OtWord::parse(w, &table).with_context(|| format!("word {w:?}")))
        .collect::<Result<Vec<_>, _>>()?;

    let pool = thread_pool(a.jobs)?;
    let ranked = pool.install(|| {
        parsed
            .par_iter()
            .map(|w| {
                let limits = GenLimits {
                    max_insertions: a
                        .max_insertions
                        .unwrap_or_else(|| GenLimits::for_word(w).max_insertions),
                    beam: a.beam,
                    max_candidates: a.max_candidates,
                };
                romanizer.romanize(w, Some(limits))
            })
            .collect::<Result<Vec<_>, _>>()
    })?;

    for (word, candidates) in words.iter().zip(ranked) {
        write!(io.stdout, "{word}")?;
        for c in candidates {
            if a.scores {
                write!(io.stdout, "\t{}:{:.4}", c.surface, c.total)?;
            } else {
                write!(io.stdout, "\t{}", c.surface)?;
            }
        }
        writeln!(io.stdout)?;
    }
    Ok(())
}

fn lm_train(a: LmTrainArgs, io: &mut Io<'_>) -> Result<(), Failure> {
    let config = TrainConfig {
        order: a.order,
        char_order: a.char_order,
        k: a.k,
        lambda: a.lambda,
    };
    let text = if a.inputs.is_empty() {
        io.read_stdin()?
    } else {
        let mut all = String::new();
        for p in &a.inputs {
            all.push_str(&read_file(p)?);
            all.push('\n');
        }
        all
    };
    let lines: Vec<&str> = text.lines().collect();
    let model = NgramModel::train(&lines, &config).map_err(|e| match e {
        otkit_core::lm::LmError::InvalidConfig(m) => usage(m),
        other => Failure::Data(other.into()),
    })?;
    model.save(&a.output)?;
    writeln!(io.stderr, "vocabulary: {} words", model.vocab().len())?;
    Ok(())
}

fn lm_score(a: LmScoreArgs, io: &mut Io<'_>) -> Result<(), Failure> {
    let model = NgramModel::load(&a.model)?;
    let text = io.read_stdin()?;
    let lines: Vec<&str> = text.lines().collect();
    if a.perplexity {
        writeln!(io.stdout, "{:.6}", model.perplexity(&lines)?)?;
    } else {
        for line in lines {
            let tokens: Vec<&str> = line.split_whitespace().collect();
            writeln!(io.stdout, "{:.6}", model.score(&tokens))?;
        }
    }
    Ok(())
}

fn stem(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn read_lines(p: &Path) -> Result<Vec<String>, Failure> {
    Ok(read_file(p)?
        .lines()
        .map(|l| l.strip_suffix('\r').unwrap_or(l).to_owned())
        .collect())
}

fn list_files(dir: &Path) -> Result<BTreeMap<String, PathBuf>, Failure> {
    let mut files = BTreeMap::new();
    let entries = std::fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))?;
    for entry in entries {
        let path = entry?.path();
        if path.is_file() {
            files.insert(
                path.file_name().unwrap().to_string_lossy().into_owned(),
                path,
            );
        }
    }
    Ok(files)
}

fn eval(a: EvalArgs, io: &mut Io<'_>) -> Result<(), Failure> {
    let (ref_dir, hyp_dir) = (a.reference.is_dir(), a.hyp.is_dir());
    if ref_dir != hyp_dir {
        return Err(usage(
            "--ref and --hyp must both be files or both be directories",
        ));
    }
    let pairs: Vec<(PathBuf, PathBuf)> = if ref_dir {
        let (refs, hyps) = (list_files(&a.reference)?, list_files(&a.hyp)?);
        let missing: Vec<&String> = refs.keys().filter(|k| !hyps.contains_key(*k)).collect();
        if !missing.is_empty() {
            return Err(Failure::Data(anyhow!("no hypothesis for {missing:?}")));
        }
        refs.into_iter()
            .map(|(name, r)| (r, hyps[&name].clone()))
            .collect()
    } else {
        vec![(a.reference.clone(), a.hyp.clone())]
    };

    let metas: BTreeMap<String, DocMeta> = match &a.manifest {
        Some(p) => CorpusManifest::load(p)?
            .entries
            .into_iter()
            .map(|e| (stem(&e.transcript), e.meta))
            .collect(),
        None => BTreeMap::new(),
    };
    let docs = pairs
        .iter()
        .map(|(r, h)| {
            let name = stem(r);
            Ok(DocumentPair {
                meta: metas
                    .get(&name)
                    .cloned()
                    .unwrap_or_else(|| DocMeta::named(name)),
                reference: read_lines(r)?,
                hypothesis: read_lines(h)?,
            })
        })
        .collect::<Result<Vec<_>, Failure>>()?;

    let report = thread_pool(a.jobs)?.install(|| corpus_report(&docs));
    for row in report.rows.iter().filter(|r| r.error.is_some()) {
        writeln!(
            io.stderr,
            "warning: {}: {}",
            row.meta.name,
            row.error.as_ref().unwrap()
        )?;
    }
    let rendered = match a.report {
        ReportFormat::Table => report.render_table(),
        ReportFormat::Csv => report.render_csv(),
    };
    io.stdout.write_all(rendered.as_bytes())?;
    Ok(())
}

struct Prepared {
    name: String,
    lines: usize,
    warnings: Vec<String>,
}

fn prepare_entry(
    manifest: &CorpusManifest,
    idx: usize,
    out: &Path,
    reverse: bool,
    policy: &GroundTruthPolicy,
) -> anyhow::Result<Prepared> {
    let entry = &manifest.entries[idx];
    let page_path = manifest.resolve(&entry.page);
    let name = stem(&entry.page);
    let bytes =
        std::fs::read(&page_path).with_context(|| format!("reading {}", page_path.display()))?;
    let (doc, warnings) =
        parse_page_xml_with_warnings(&bytes).with_context(|| format!("{}", page_path.display()))?;
    let transcript_path = manifest.resolve(&entry.transcript);
    let text = std::fs::read_to_string(&transcript_path)
        .with_context(|| format!("reading {}", transcript_path.display()))?;
    let pairs =
        pair_ground_truth(&doc, &transcript_lines(&text), policy).with_context(|| name.clone())?;

    let txt = out.join(format!("{name}.txt"));
    std::fs::write(&txt, render_pairs(&pairs, reverse))
        .with_context(|| format!("writing {}", txt.display()))?;
    let xml = out.join(format!("{name}.xml"));
    std::fs::write(&xml, write_page_xml(&fill_page_text(&doc, &pairs, reverse)))
        .with_context(|| format!("writing {}", xml.display()))?;
    Ok(Prepared {
        name,
        lines: pairs.len(),
        warnings: warnings.iter().map(|w| w.to_string()).collect(),
    })
}

fn prepare(a: PrepareArgs, io: &mut Io<'_>) -> Result<(), Failure> {
    let manifest = CorpusManifest::load(&a.manifest)?;
    let mut names = BTreeSet::new();
    for e in &manifest.entries {
        if !names.insert(stem(&e.page)) {
            return Err(Failure::Data(anyhow!(
                "two manifest entries export to the same name {:?}",
                stem(&e.page)
            )));
        }
    }
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let policy = GroundTruthPolicy {
        preserve_errors: !a.tidy,
    };
    let reverse = !a.no_reverse;

    let results: Vec<anyhow::Result<Prepared>> = thread_pool(a.jobs)?.install(|| {
        (0..manifest.entries.len())
            .into_par_iter()
            .map(|i| prepare_entry(&manifest, i, &a.out, reverse, &policy))
            .collect()
    });
    let mut first_error = None;
    for r in results {
        match r {
            Ok(p) => {
                for w in &p.warnings {
                    writeln!(io.stderr, "warning: {}: {w}", p.name)?;
                }
                writeln!(io.stdout, "{}\t{}", p.name, p.lines)?;
            }
            Err(e) => {
                writeln!(io.stderr, "error: {e:#}")?;
                first_error.get_or_insert(e);
            }
        }
    }
    match first_error {
        Some(e) => Err(Failure::Data(e.context("prepare failed"))),
        None => Ok(()),
    }
}

fn split(a: SplitArgs, io: &mut Io<'_>) -> Result<(), Failure> {
    let ratios: SplitRatios = a
        .ratios
        .parse()
        .map_err(|e: otkit_core::ingest::IngestError| usage(e.to_string()))?;
    let manifest = CorpusManifest::load(&a.manifest)?;
    let labelled = split_corpus(&manifest, &ratios, a.seed)?;
    match &a.output {
        Some(p) => labelled.save(p)?,
        None => io.stdout.write_all(labelled.to_json().as_bytes())?,
    }
    Ok(())
}
