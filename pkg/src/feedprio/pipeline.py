"""End-to-end experiment pipelines behind the command-line interface.

Each ``run_*`` function takes a validated RunConfig, reads only the inputs it
declares, writes its outputs under the config's output directory, and returns
a small summary dict for display. Outputs carry no timestamps; a rerun with
the same config file and inputs is byte-identical.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Mapping, Sequence

from . import corpus, evaluation, feedback, mining, nrp, priority, topics
from .config import RunConfig
from .errors import ConfigurationError, DataError, IntegrityError
from .llmclient import ChatClient, FixtureClient, HttpChatClient, prompt_sha256, run_prompts
from .textkit import TokenSeq, load_stopwords, normalize

logger = logging.getLogger(__name__)

BASELINE_METHOD = "refeed"


def _require(config: RunConfig, *names: str) -> None:
    missing = [name for name in names if getattr(config.paths, name) is None]
    if missing:
        raise ConfigurationError(f"config is missing required paths: {missing}")


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _instance_slug(instance_id: str) -> str:
    return instance_id.replace("/", "__")


def _build_all_instances(
    requirements: Sequence[corpus.Requirement],
) -> list[corpus.PrioritizationInstance]:
    by_app: dict[str, list[corpus.Requirement]] = {}
    for r in requirements:
        by_app.setdefault(r.app, []).append(r)
    instances: list[corpus.PrioritizationInstance] = []
    for app in sorted(by_app):
        schedule = corpus.schedule_from_requirements(by_app[app])
        instances.extend(corpus.build_instances(schedule, by_app[app]))
    return instances


def _topic_clusters(
    msg_docs: Sequence[TokenSeq],
    req_ids: Sequence[str],
    req_docs: Sequence[TokenSeq],
    n_topics: int,
    passes: int,
    seed: int,
) -> tuple[dict[int, tuple[str, ...]], topics.TopicModel | None]:
    """Cluster requirements by the dominant topic of an LDA fit on the messages.

    With no trainable message text, every requirement lands in the fallback
    cluster (scored over its own associations downstream).
    """
    if not any(msg_docs):
        logger.warning("no review tokens to fit topics on; all requirements unclustered")
        return {topics.FALLBACK_CLUSTER: tuple(req_ids)}, None
    model = topics.fit_lda(msg_docs, n_topics=n_topics, passes=passes, seed=seed)
    assignments = topics.assign_topics(model, req_docs)
    return topics.cluster_requirements(req_ids, assignments), model


def _coherence_for(
    clusters: Mapping[int, tuple[str, ...]],
    space: str,
    req_vectors,
    model: topics.TopicModel | None,
    req_docs_by_id: Mapping[str, TokenSeq],
) -> dict[int, float]:
    """Cluster coherence in the configured similarity space."""
    if space == "topic" and model is not None:
        thetas = {
            rid: theta
            for rid, doc in req_docs_by_id.items()
            if (theta := topics.infer_theta(model, doc)) is not None
        }
        placeable = {
            cid: tuple(r for r in members if r in thetas)
            for cid, members in clusters.items()
        }
        return priority.embedding_cluster_coherence(placeable, thetas)
    return priority.cluster_coherence(clusters, req_vectors)


def run_prioritize(config: RunConfig) -> dict:
    """Score every instance with the direct and cluster methods, then evaluate.

    Emits per-instance priority tables, a metrics CSV, a stats CSV, plot-ready
    JSON series per app, and a manifest.
    """
    _require(config, "requirements", "reviews")
    out = config.paths.output_dir
    knobs = config.pipeline

    requirements = corpus.load_requirements(config.paths.requirements)
    messages = corpus.load_messages(config.paths.reviews)
    stopwords = load_stopwords(config.paths.stopwords)
    lexicon = feedback.load_lexicon(config.paths.lexicon) if config.paths.lexicon else None
    scorer = feedback.LexiconSentimentScorer(lexicon=lexicon)
    overrides = (
        feedback.load_score_file(config.paths.score_file) if config.paths.score_file else None
    )
    properties = feedback.extract_properties(messages, scorer, overrides)

    req_embeddings = msg_embeddings = None
    if config.paths.requirement_embeddings and config.paths.message_embeddings:
        req_embeddings = topics.load_embeddings(config.paths.requirement_embeddings)
        msg_embeddings = topics.load_embeddings(config.paths.message_embeddings)

    instances = _build_all_instances(requirements)
    metrics_path = out / "metrics.csv"
    if not instances:
        evaluation.write_metrics_csv(metrics_path, [])
        raise DataError("no prioritization instances could be built from the schedule")

    (out / "priorities").mkdir(exist_ok=True)
    all_rows: list[evaluation.MetricsRow] = []
    for instance in instances:
        reviews = corpus.window_reviews(messages, instance)
        req_ids = [r.id for r in instance.requirements]
        req_docs = {r.id: normalize(r.text, stopwords, stem=knobs.stem) for r in instance.requirements}
        msg_docs = {m.id: normalize(m.text, stopwords, stem=knobs.stem) for m in reviews}

        req_vecs, msg_vecs = priority.build_vectors(req_docs, msg_docs, knobs.vectorizer)
        sims = priority.similarity_table(req_vecs, msg_vecs)
        assoc = priority.associate(sims, knobs.threshold)
        tables = [
            priority.PriorityTable(
                method=BASELINE_METHOD, scores=priority.score_direct(assoc, sims, properties)
            )
        ]

        clusters, model = _topic_clusters(
            [msg_docs[m.id] for m in reviews],
            req_ids,
            [req_docs[rid] for rid in req_ids],
            knobs.n_topics,
            knobs.passes,
            knobs.seed,
        )
        cassoc = priority.cluster_associate(clusters, assoc)
        lda_scores = priority.score_cluster(cassoc, sims, properties)
        tables.append(priority.PriorityTable(method="lda", scores=lda_scores))
        coherence = _coherence_for(clusters, knobs.coherence_space, req_vecs, model, req_docs)
        tables.append(
            priority.PriorityTable(
                method="lda_c",
                scores=priority.score_cluster_coherent(cassoc, sims, properties, coherence),
            )
        )

        if req_embeddings is not None and msg_embeddings is not None:
            missing = [rid for rid in req_ids if rid not in req_embeddings]
            missing += [m.id for m in reviews if m.id not in msg_embeddings]
            if missing:
                raise DataError(f"embeddings missing for ids: {missing[:5]}")
            if reviews:
                centroids = topics.fit_kmeans(
                    [msg_embeddings[m.id] for m in reviews], knobs.n_topics, seed=knobs.seed
                )
                assigned = topics.assign_embedded(
                    {rid: req_embeddings[rid] for rid in req_ids}, centroids
                )
                embed_clusters = topics.cluster_requirements(
                    req_ids, [assigned[rid] for rid in req_ids]
                )
            else:
                embed_clusters = {topics.FALLBACK_CLUSTER: tuple(req_ids)}
            embed_cassoc = priority.cluster_associate(embed_clusters, assoc)
            embed_scores = priority.score_cluster(embed_cassoc, sims, properties)
            tables.append(priority.PriorityTable(method="embed", scores=embed_scores))
            embed_coherence = priority.embedding_cluster_coherence(embed_clusters, req_embeddings)
            tables.append(
                priority.PriorityTable(
                    method="embed_c",
                    scores=priority.score_cluster_coherent(
                        embed_cassoc, sims, properties, embed_coherence
                    ),
                )
            )

        priority.write_priority_csv(
            out / "priorities" / f"{_instance_slug(instance.id)}.csv", tables
        )
        for table in tables:
            all_rows.extend(
                evaluation.evaluate_ranking(
                    instance.id, table.method, table.ranking(), instance.ground_truth
                )
            )

    evaluation.write_metrics_csv(metrics_path, all_rows)
    comparisons, combined = evaluation.compare_methods(all_rows, BASELINE_METHOD)
    evaluation.write_stats_csv(out / "stats.csv", comparisons, combined)

    per_app: dict[str, list[evaluation.MetricsRow]] = {}
    for row in all_rows:
        per_app.setdefault(row.instance.split("/")[0], []).append(row)
    _write_json(
        out / "plot_data.json", {app: evaluation.plot_data(rows) for app, rows in per_app.items()}
    )

    methods = sorted({row.method for row in all_rows})
    _write_json(
        out / "manifest.json",
        {
            "command": "prioritize",
            "config_sha256": config.config_sha256,
            "seed": knobs.seed,
            "methods": methods,
            "instances": [
                {"id": i.id, "n": i.n, "k": i.k, "window": [str(i.window[0]), str(i.window[1])]}
                for i in instances
            ],
            "outputs": ["metrics.csv", "stats.csv", "plot_data.json", "priorities/"],
        },
    )
    return {
        "instances": len(instances),
        "methods": methods,
        "metrics_rows": len(all_rows),
        "output_dir": str(out),
    }


def _load_cluster_file(path: Path, valid_ids: Sequence[str]) -> dict[int, tuple[str, ...]]:
    """Read ``cluster_id,requirement_id`` rows partitioning the requirement set."""
    import csv as _csv

    members: dict[int, list[str]] = {}
    seen: set[str] = set()
    with path.open(encoding="utf-8", newline="") as fh:
        for i, row in enumerate(_csv.DictReader(fh), start=2):
            try:
                cid = int(row["cluster_id"])
                rid = row["requirement_id"].strip()
            except (KeyError, TypeError, ValueError) as exc:
                raise DataError(f"{path} row {i}: {exc}") from exc
            if rid in seen:
                raise IntegrityError(f"{path} row {i}: requirement {rid!r} in two clusters")
            seen.add(rid)
            members.setdefault(cid, []).append(rid)
    valid = set(valid_ids)
    unknown = sorted(seen - valid)
    if unknown:
        raise IntegrityError(f"{path}: cluster members not in the requirement set: {unknown}")
    unclustered = sorted(valid - seen)
    if unclustered:
        raise IntegrityError(f"{path}: requirements missing from every cluster: {unclustered}")
    return {cid: tuple(ids) for cid, ids in sorted(members.items())}


def _mining_client(config: RunConfig) -> ChatClient:
    if config.mining.mode == "fixture":
        _require(config, "fixtures")
        return FixtureClient.from_file(config.paths.fixtures)
    if not config.mining.endpoint or not config.mining.model:
        raise ConfigurationError("live mining needs mining.endpoint and mining.model")
    api_key = config.mining.api_key()
    if not api_key:
        raise ConfigurationError(
            f"live mining needs an API key in ${config.mining.api_key_env}"
        )
    return HttpChatClient(
        endpoint=config.mining.endpoint,
        model=config.mining.model,
        api_key=api_key,
        temperature=config.mining.temperature,
    )


def run_mine(config: RunConfig) -> dict:
    """Run the whole-set and per-cluster prompts, parse, aggregate, and score."""
    _require(config, "benchmark", "clusters")
    out = config.paths.output_dir
    table = corpus.load_benchmark(config.paths.benchmark)
    ids = list(table.ids)
    texts = dict(zip(table.ids, table.texts))
    clusters = _load_cluster_file(config.paths.clusters, ids)
    client = _mining_client(config)

    prompts = [("baseline", mining.build_prompt([(rid, texts[rid]) for rid in ids]))]
    for cid, members in clusters.items():
        prompts.append(
            (f"cluster_{cid}", mining.build_prompt([(rid, texts[rid]) for rid in members]))
        )
    responses = run_prompts(
        client, [p for _, p in prompts], max_in_flight=config.mining.max_in_flight
    )
    failed = [label for (label, _), r in zip(prompts, responses) if r is None]
    if failed:
        logger.warning("partial mining results: no response for %s", failed)

    transcript = [
        {
            "label": label,
            "prompt_sha256": prompt_sha256(prompt),
            "prompt": prompt,
            "response_text": response if response is not None else "",
        }
        for (label, prompt), response in zip(prompts, responses)
    ]
    _write_json(out / "transcripts.json", transcript)

    baseline = mining.parse_requires(responses[0] or "", ids, mining.BASELINE)
    cluster_sets = []
    for ((label, _), response), (_, members) in zip(
        zip(prompts[1:], responses[1:]), clusters.items()
    ):
        cluster_sets.append(mining.parse_requires(response or "", members, label))
    irefeed = mining.union_pairs(cluster_sets, "irefeed")
    combined = mining.aggregate(baseline, cluster_sets)

    mining.write_pairs_csv(out / "pairs_baseline.csv", baseline)
    mining.write_pairs_csv(out / "pairs_irefeed.csv", irefeed)
    mining.write_pairs_csv(out / "pairs_combined.csv", combined)

    summary: dict = {
        "baseline_pairs": len(baseline),
        "irefeed_pairs": len(irefeed),
        "combined_pairs": len(combined),
        "partial": bool(failed),
        "output_dir": str(out),
    }
    if config.paths.gold_pairs:
        gold = mining.read_pairs_csv(config.paths.gold_pairs, mining.GOLD)
        import csv as _csv

        with (out / "accuracy.csv").open("w", encoding="utf-8", newline="") as fh:
            writer = _csv.writer(fh, lineterminator="\n")
            writer.writerow(
                ["source", "n_pairs", "true_positives", "recall", "precision", "f1", "f2"]
            )
            for source in (baseline, irefeed, combined):
                m = mining.evaluate_pairs(source, gold)
                writer.writerow(
                    [
                        source.tag,
                        m.n_predicted,
                        m.true_positives,
                        repr(m.recall),
                        repr(m.precision),
                        repr(m.f1),
                        repr(m.f2),
                    ]
                )
                summary[f"{source.tag}_recall"] = m.recall
                summary[f"{source.tag}_precision"] = m.precision
    else:
        logger.warning("no gold pairs configured; skipping accuracy scoring")

    _write_json(
        out / "mine_manifest.json",
        {
            "command": "mine",
            "config_sha256": config.config_sha256,
            "mode": config.mining.mode,
            "prompts": [label for label, _ in prompts],
            "failed_prompts": failed,
            "pair_counts": {
                "baseline": len(baseline),
                "irefeed": len(irefeed),
                "combined": len(combined),
            },
        },
    )
    return summary


def run_dvalue(config: RunConfig) -> dict:
    """Derive dependency-value vectors (all variants) from a mined pair file."""
    _require(config, "benchmark", "pairs")
    out = config.paths.output_dir
    table = corpus.load_benchmark(config.paths.benchmark)
    pairs = mining.read_pairs_csv(config.paths.pairs, mining.COMBINED)
    raw = mining.dvalue(pairs, table.ids)
    vectors = {variant: mining.dvalue_variant(raw, variant) for variant in mining.DVALUE_VARIANTS}

    import csv as _csv

    with (out / "dvalues.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = _csv.writer(fh, lineterminator="\n")
        writer.writerow(["requirement_id", *mining.DVALUE_VARIANTS])
        for rid in table.ids:
            writer.writerow([rid, *(repr(vectors[v].values[rid]) for v in mining.DVALUE_VARIANTS)])
    return {"pairs": len(pairs), "requirements": len(table.ids), "output_dir": str(out)}


def run_nrp(config: RunConfig) -> dict:
    """Benchmark bi-objective search against the dependency-aware tri-objective runs."""
    _require(config, "benchmark", "pairs")
    out = config.paths.output_dir
    solver = config.solver
    if solver.runs == 1:
        logger.warning("single-run shares are low-confidence; configure more runs")
    table = corpus.load_benchmark(config.paths.benchmark)
    pairs = mining.read_pairs_csv(config.paths.pairs, mining.COMBINED)
    raw = mining.dvalue(pairs, table.ids)
    problem_bi = nrp.NrpProblem.from_benchmark(table, weights=solver.weights)

    fronts_dir = out / "fronts"
    fronts_dir.mkdir(exist_ok=True)

    def params_for(seed: int) -> nrp.SearchParams:
        return nrp.SearchParams(
            population=solver.population,
            generations=solver.generations,
            tournament=solver.tournament,
            crossover_prob=solver.crossover_prob,
            mutation_prob=solver.mutation_prob,
            seed=seed,
            crowding=solver.crowding,
        )

    seeds = [solver.seed + i for i in range(solver.runs)]
    bi_runs: dict[int, nrp.NsgaRun] = {}
    for seed in seeds:
        run = nrp.nsga2(problem_bi, params_for(seed), nrp.BI)
        if solver.requires_filter:
            run = nrp.NsgaRun(
                front=nrp.apply_requires_filter(run.front, pairs, table.ids),
                objective_set=run.objective_set,
                params=run.params,
                evaluations=run.evaluations,
                first_front_sizes=run.first_front_sizes,
            )
        bi_runs[seed] = run
        nrp.write_front_csv(fronts_dir / f"bi_seed{seed}.csv", run.front)

    share_rows: list[dict] = []
    detail: dict[str, dict] = {}
    for variant in solver.dvalue_variants:
        vector = mining.dvalue_variant(raw, variant)
        problem_tri = nrp.NrpProblem.from_benchmark(table, weights=solver.weights, dvalues=vector)
        base_shares: list[float] = []
        tri_shares: list[float] = []
        per_seed = {}
        for seed in seeds:
            tri_run = nrp.nsga2(problem_tri, params_for(seed), nrp.TRI)
            tri_front = tri_run.front
            if solver.requires_filter:
                tri_front = nrp.apply_requires_filter(tri_front, pairs, table.ids)
            nrp.write_front_csv(fronts_dir / f"{variant}_seed{seed}.csv", tri_front)
            # Shares compare what each search achieved in (value, cost) space,
            # so each front is first reduced to its own projected closure.
            base_proj = nrp.reference_front([bi_runs[seed].front])
            tri_proj = nrp.reference_front([tri_front])
            reference = nrp.reference_front([base_proj, tri_proj])
            base_share = nrp.share_of_reference(base_proj, reference)
            tri_share = nrp.share_of_reference(tri_proj, reference)
            base_shares.append(base_share)
            tri_shares.append(tri_share)
            per_seed[seed] = {
                "baseline_share": base_share,
                "irefeed_share": tri_share,
                "baseline_front": len(bi_runs[seed].front),
                "irefeed_front": len(tri_front),
                "reference_front": len(reference),
            }
        share_rows.append(
            {
                "variant": variant,
                "baseline_share": sum(base_shares) / len(base_shares),
                "irefeed_share": sum(tri_shares) / len(tri_shares),
            }
        )
        detail[variant] = per_seed

    import csv as _csv

    with (out / "shares.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = _csv.writer(fh, lineterminator="\n")
        writer.writerow(["variant", "baseline_share", "irefeed_share"])
        for row in share_rows:
            writer.writerow([row["variant"], repr(row["baseline_share"]), repr(row["irefeed_share"])])

    _write_json(
        out / "nrp_manifest.json",
        {
            "command": "nrp",
            "config_sha256": config.config_sha256,
            "seeds": seeds,
            "requires_filter": solver.requires_filter,
            "params": {
                "population": solver.population,
                "generations": solver.generations,
                "tournament": solver.tournament,
                "crossover_prob": solver.crossover_prob,
                "mutation_prob": solver.mutation_prob,
                "crowding": solver.crowding,
            },
            "evaluations_per_run": next(iter(bi_runs.values())).evaluations,
            "first_front_sizes": {
                str(seed): list(run.first_front_sizes) for seed, run in bi_runs.items()
            },
            "shares": detail,
        },
    )
    return {"variants": list(solver.dvalue_variants), "runs": solver.runs, "shares": share_rows}


def run_ingest(config: RunConfig) -> dict:
    """Validate the corpus files and report the instances they define."""
    _require(config, "requirements", "reviews")
    requirements = corpus.load_requirements(config.paths.requirements)
    messages = corpus.load_messages(config.paths.reviews)
    instances = _build_all_instances(requirements)
    payload = [
        {
            "id": i.id,
            "app": i.app,
            "n": i.n,
            "k": i.k,
            "window": [str(i.window[0]), str(i.window[1])],
            "n_messages": len(corpus.window_reviews(messages, i)),
        }
        for i in instances
    ]
    _write_json(config.paths.output_dir / "instances.json", payload)
    if not instances:
        logger.warning("corpus defines no prioritization instances")
    return {
        "requirements": len(requirements),
        "messages": len(messages),
        "instances": len(instances),
    }


def run_topics(config: RunConfig) -> dict:
    """Fit a topic model over the whole review corpus and cluster all requirements."""
    _require(config, "requirements", "reviews")
    out = config.paths.output_dir
    knobs = config.pipeline
    requirements = corpus.load_requirements(config.paths.requirements)
    messages = corpus.load_messages(config.paths.reviews)
    stopwords = load_stopwords(config.paths.stopwords)
    msg_docs = [normalize(m.text, stopwords, stem=knobs.stem) for m in messages]
    req_ids = [r.id for r in requirements]
    req_docs = [normalize(r.text, stopwords, stem=knobs.stem) for r in requirements]

    model = topics.fit_lda(msg_docs, n_topics=knobs.n_topics, passes=knobs.passes, seed=knobs.seed)
    topics.save_model(model, out / "model.json")
    assignments = topics.assign_topics(model, req_docs)
    clusters = topics.cluster_requirements(req_ids, assignments)

    import csv as _csv

    with (out / "clusters.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = _csv.writer(fh, lineterminator="\n")
        writer.writerow(["cluster_id", "requirement_id"])
        for cid, members in clusters.items():
            for rid in members:
                writer.writerow([cid, rid])
    return {
        "topics": model.n_topics,
        "clusters": len(clusters),
        "perplexity_first": model.perplexity_per_pass[0],
        "perplexity_last": model.perplexity_per_pass[-1],
    }


def run_evaluate(config: RunConfig) -> dict:
    """Recompute stats and plot data from an existing metrics file."""
    out = config.paths.output_dir
    metrics_path = out / "metrics.csv"
    if not metrics_path.exists():
        raise ConfigurationError(f"{metrics_path} not found; run prioritize first")
    rows = evaluation.read_metrics_csv(metrics_path)
    if not rows:
        raise DataError(f"{metrics_path} holds no metric rows")
    methods = []
    for row in rows:
        if row.method not in methods:
            methods.append(row.method)
    baseline = BASELINE_METHOD if BASELINE_METHOD in methods else methods[0]
    if baseline != BASELINE_METHOD:
        logger.warning("baseline method %r absent; comparing against %r", BASELINE_METHOD, baseline)
    comparisons, combined = evaluation.compare_methods(rows, baseline)
    evaluation.write_stats_csv(out / "stats.csv", comparisons, combined)
    per_app: dict[str, list[evaluation.MetricsRow]] = {}
    for row in rows:
        per_app.setdefault(row.instance.split("/")[0], []).append(row)
    _write_json(
        out / "plot_data.json", {app: evaluation.plot_data(app_rows) for app, app_rows in per_app.items()}
    )
    return {"metrics_rows": len(rows), "baseline": baseline, "methods": methods}


def run_report(config: RunConfig) -> dict:
    """Collect whatever result files exist into one machine-readable report."""
    out = config.paths.output_dir
    report: dict = {"output_dir": str(out)}

    metrics_path = out / "metrics.csv"
    if metrics_path.exists():
        rows = evaluation.read_metrics_csv(metrics_path)
        f2_at_k: dict[str, list[float]] = {}
        for row in rows:
            if row.cutoff_label == "k":
                f2_at_k.setdefault(row.method, []).append(row.f2)
        report["f2_at_k"] = {
            method: sum(vals) / len(vals) for method, vals in sorted(f2_at_k.items())
        }

    import csv as _csv

    for name, key in (("accuracy.csv", "pair_accuracy"), ("shares.csv", "nrp_shares")):
        path = out / name
        if path.exists():
            with path.open(encoding="utf-8", newline="") as fh:
                report[key] = list(_csv.DictReader(fh))

    _write_json(out / "report.json", report)
    return report
