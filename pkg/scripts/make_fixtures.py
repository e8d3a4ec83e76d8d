#!/usr/bin/env python3
"""Regenerate the shipped fixture files.

Word processor: a synthetic benchmark shaped like the classic 50-requirement
word-processor dataset: same header, same three anchor rows at the top and
two at the bottom, four stakeholder value columns, and three resource
columns. The recorded chat responses are constructed so the whole-set prompt
yields 18 distinct pairs, the per-cluster prompts union to 26, and their
combination holds 37, with 5/7/11 of those hitting the 65-pair gold set.

Notely: a small synthetic note-taking app corpus (release notes over three
months plus app reviews) for exercising the prioritization pipeline, with
precomputed embeddings and a sentence-score override file.

Rerunning this script is deterministic and leaves git clean.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from feedprio.llmclient import prompt_sha256  # noqa: E402
from feedprio.mining import build_prompt  # noqa: E402

OUT = ROOT / "data" / "wordprocessor"
NOTELY_OUT = ROOT / "data" / "notely"

# id, text, s1..s4, design, development, qa
BENCHMARK = [
    ("r1", "Create a new file", 8, 9, 9, 9, 17, 22, 12),
    ("r2", "Open an existing file", 8, 9, 9, 9, 20, 25, 13),
    ("r3", "Close current file", 8, 9, 8, 1, 5, 1, 2),
    ("r4", "Save the current file", 9, 9, 9, 8, 6, 4, 3),
    ("r5", "Save the file under a new name", 7, 6, 6, 5, 4, 3, 2),
    ("r6", "Show a list of recently opened files", 5, 4, 6, 3, 4, 5, 3),
    ("r7", "Recover unsaved changes after a crash", 6, 8, 7, 7, 10, 14, 8),
    ("r8", "Import text from another file format", 4, 3, 5, 4, 12, 18, 9),
    ("r9", "Select a text passage", 9, 8, 9, 9, 4, 3, 2),
    ("r10", "Move the cursor with keyboard and mouse", 9, 8, 8, 9, 3, 2, 2),
    ("r11", "Cut and copy the selected text", 8, 8, 9, 8, 4, 3, 2),
    ("r12", "Paste text from the clipboard", 8, 8, 9, 8, 4, 4, 2),
    ("r13", "Undo and redo recent edits", 9, 7, 8, 8, 7, 8, 4),
    ("r14", "Find a text in the document", 7, 7, 8, 6, 5, 6, 3),
    ("r15", "Replace a text in the document", 6, 6, 7, 5, 4, 5, 3),
    ("r16", "Insert special symbols", 3, 2, 4, 3, 6, 9, 5),
    ("r17", "Apply bold, italic, and underline styles", 8, 7, 8, 7, 4, 5, 3),
    ("r18", "Change the font of the selected text", 7, 6, 7, 6, 5, 6, 3),
    ("r19", "Change the size of the selected text", 7, 6, 7, 6, 4, 5, 3),
    ("r20", "Color the selected text", 5, 4, 5, 4, 4, 6, 3),
    ("r21", "Define and apply named styles", 4, 3, 5, 3, 11, 16, 8),
    ("r22", "Align paragraphs left, right, or centered", 6, 6, 6, 5, 5, 6, 3),
    ("r23", "Make bulleted and numbered lists", 6, 5, 6, 5, 6, 8, 4),
    ("r24", "Adjust the line spacing", 5, 4, 5, 4, 4, 5, 3),
    ("r25", "Set the page margins", 5, 5, 5, 4, 5, 6, 3),
    ("r26", "Choose the paper size", 4, 4, 5, 4, 4, 5, 3),
    ("r27", "Edit headers and footers", 5, 4, 5, 4, 7, 10, 5),
    ("r28", "Number the pages automatically", 5, 5, 6, 4, 5, 7, 4),
    ("r29", "Preview the printed pages", 6, 6, 6, 5, 8, 11, 6),
    ("r30", "Print the document", 8, 8, 8, 8, 9, 12, 7),
    ("r31", "Export the document as PDF", 7, 7, 8, 7, 8, 12, 6),
    ("r32", "Insert a table", 6, 5, 6, 5, 9, 13, 7),
    ("r33", "Edit table rows and columns", 5, 4, 5, 4, 8, 12, 6),
    ("r34", "Insert an image from a file", 5, 5, 6, 5, 8, 12, 6),
    ("r35", "Resize and crop an image", 4, 3, 4, 3, 7, 11, 6),
    ("r36", "Add captions to tables and images", 2, 2, 3, 2, 5, 8, 4),
    ("r37", "Insert charts from spreadsheet data", 2, 1, 3, 2, 14, 21, 10),
    ("r38", "Draw shapes and arrows", 2, 1, 2, 2, 12, 19, 9),
    ("r39", "Check the spelling", 7, 7, 7, 6, 8, 10, 6),
    ("r40", "Check the grammar", 5, 5, 5, 4, 12, 17, 9),
    ("r41", "Count words and characters", 4, 4, 5, 3, 2, 2, 1),
    ("r42", "Add comments to a text passage", 4, 3, 5, 3, 7, 10, 5),
    ("r43", "Track changes by multiple authors", 3, 2, 4, 3, 14, 20, 10),
    ("r44", "Compare two document versions", 2, 2, 3, 2, 12, 18, 9),
    ("r45", "Suggest synonyms from a thesaurus", 3, 3, 3, 2, 8, 13, 7),
    ("r46", "Show the help contents", 3, 6, 4, 5, 4, 5, 3),
    ("r47", "Show context-sensitive help hints", 2, 5, 3, 4, 6, 9, 5),
    ("r48", "Show the about dialog", 1, 3, 2, 2, 1, 1, 1),
    ("r49", "Load help file", 2, 7, 5, 6, 3, 3, 3),
    ("r50", "Search a text in the help file", 1, 7, 5, 6, 2, 2, 2),
]

CLUSTERS = {
    0: ["r1", "r2", "r3", "r4", "r5", "r6", "r7", "r8"],
    1: ["r9", "r10", "r11", "r12", "r13", "r14", "r15", "r16"],
    2: ["r17", "r18", "r19", "r20", "r21", "r22", "r23", "r24"],
    3: ["r25", "r26", "r27", "r28", "r29", "r30", "r31"],
    4: ["r32", "r33", "r34", "r35", "r36", "r37", "r38"],
    5: ["r39", "r40", "r41", "r42", "r43", "r44", "r45"],
    6: ["r46", "r47", "r48", "r49", "r50"],
}

# Pairs the whole-set prompt and the cluster prompts both produce (1 gold).
SHARED = [
    ("r3", "r2"),
    ("r9", "r10"),
    ("r11", "r9"),
    ("r12", "r11"),
    ("r15", "r14"),
    ("r18", "r17"),
    ("r50", "r49"),
]

# Cluster-prompt pairs beyond the shared ones (all within one cluster; 6 gold).
CLUSTER_ONLY = [
    ("r5", "r4"),
    ("r6", "r4"),
    ("r7", "r4"),
    ("r8", "r4"),
    ("r12", "r9"),
    ("r13", "r9"),
    ("r14", "r9"),
    ("r16", "r9"),
    ("r13", "r10"),
    ("r15", "r10"),
    ("r16", "r10"),
    ("r13", "r11"),
    ("r19", "r17"),
    ("r20", "r17"),
    ("r21", "r17"),
    ("r23", "r22"),
    ("r24", "r22"),
    ("r46", "r49"),
    ("r47", "r49"),
]

# Whole-set-prompt pairs the cluster prompts miss (4 gold, mostly cross-cluster).
BASELINE_ONLY = [
    ("r17", "r9"),
    ("r18", "r9"),
    ("r19", "r9"),
    ("r42", "r9"),
    ("r34", "r10"),
    ("r38", "r10"),
    ("r30", "r4"),
    ("r31", "r4"),
    ("r43", "r4"),
    ("r44", "r14"),
    ("r50", "r14"),
]

# The 11 predicted pairs that are also in the gold set.
GOLD_HITS = [
    ("r3", "r2"),
    ("r5", "r4"),
    ("r7", "r4"),
    ("r12", "r9"),
    ("r13", "r10"),
    ("r21", "r17"),
    ("r46", "r49"),
    ("r17", "r9"),
    ("r18", "r9"),
    ("r19", "r9"),
    ("r42", "r9"),
]

# Plausible gold pairs no prompt recovers; the first 54 outside the combined
# set are shipped, totalling 65 with the hits above.
GOLD_MISS_POOL = [
    ("r4", "r2"),
    ("r5", "r2"),
    ("r6", "r2"),
    ("r6", "r1"),
    ("r7", "r1"),
    ("r7", "r2"),
    ("r8", "r1"),
    ("r8", "r2"),
    ("r16", "r11"),
    ("r20", "r9"),
    ("r21", "r9"),
    ("r22", "r9"),
    ("r23", "r9"),
    ("r24", "r9"),
    ("r25", "r1"),
    ("r26", "r1"),
    ("r27", "r1"),
    ("r27", "r10"),
    ("r28", "r1"),
    ("r28", "r27"),
    ("r29", "r25"),
    ("r29", "r26"),
    ("r29", "r30"),
    ("r30", "r26"),
    ("r30", "r29"),
    ("r31", "r2"),
    ("r31", "r29"),
    ("r31", "r30"),
    ("r32", "r10"),
    ("r33", "r10"),
    ("r33", "r32"),
    ("r35", "r9"),
    ("r35", "r10"),
    ("r35", "r34"),
    ("r36", "r9"),
    ("r36", "r32"),
    ("r36", "r34"),
    ("r37", "r32"),
    ("r37", "r34"),
    ("r38", "r9"),
    ("r39", "r2"),
    ("r39", "r9"),
    ("r40", "r2"),
    ("r40", "r39"),
    ("r41", "r2"),
    ("r42", "r2"),
    ("r42", "r10"),
    ("r43", "r2"),
    ("r43", "r9"),
    ("r43", "r42"),
    ("r44", "r2"),
    ("r44", "r43"),
    ("r45", "r9"),
    ("r45", "r39"),
    ("r46", "r2"),
    ("r47", "r46"),
    ("r48", "r46"),
]


def cluster_of(rid: str) -> int:
    for cid, members in CLUSTERS.items():
        if rid in members:
            return cid
    raise KeyError(rid)


def gold_misses() -> list[tuple[str, str]]:
    combined = set(SHARED + BASELINE_ONLY + CLUSTER_ONLY)
    eligible = [p for p in GOLD_MISS_POOL if p not in combined]
    return eligible[:54]


def check_design() -> None:
    ids = [row[0] for row in BENCHMARK]
    assert len(ids) == 50 and len(set(ids)) == 50
    assert sorted(sum(CLUSTERS.values(), [])) == sorted(ids)

    baseline = SHARED + BASELINE_ONLY
    union = SHARED + CLUSTER_ONLY
    combined = set(baseline) | set(union)
    gold = set(GOLD_HITS) | set(gold_misses())
    assert len(set(baseline)) == 18, len(set(baseline))
    assert len(set(union)) == 26, len(set(union))
    assert len(combined) == 37, len(combined)
    assert len(gold) == 65, len(gold)
    assert set(GOLD_HITS) == combined & gold
    assert len(set(baseline) & gold) == 5
    assert len(set(union) & gold) == 7
    for a, b in union:
        assert cluster_of(a) == cluster_of(b), (a, b)
    for a, b in combined | gold:
        assert a != b and a in ids and b in ids, (a, b)


def write_benchmark() -> None:
    with (OUT / "benchmark.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["id", "text", "value_s1", "value_s2", "value_s3", "value_s4", "design", "development", "qa"]
        )
        writer.writerows(BENCHMARK)


def write_clusters() -> None:
    with (OUT / "clusters.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["cluster_id", "requirement_id"])
        for cid, members in CLUSTERS.items():
            for rid in members:
                writer.writerow([cid, rid])


def write_gold() -> None:
    with (OUT / "gold_pairs.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["from_id", "to_id"])
        writer.writerows(sorted(set(GOLD_HITS) | set(gold_misses())))


def write_llm_fixtures() -> None:
    texts = {row[0]: row[1] for row in BENCHMARK}
    ids = [row[0] for row in BENCHMARK]

    baseline_pairs = SHARED + BASELINE_ONLY
    baseline_lines = [f"{i}. {a} --> {b}" for i, (a, b) in enumerate(sorted(baseline_pairs), 1)]
    baseline_response = (
        'Here are the "requires" pairs I can identify:\n' + "\n".join(baseline_lines) + "\n"
    )

    union = SHARED + CLUSTER_ONLY
    entries = [
        {
            "prompt_sha256": prompt_sha256(build_prompt([(rid, texts[rid]) for rid in ids])),
            "response_text": baseline_response,
        }
    ]
    for cid, members in CLUSTERS.items():
        cluster_pairs = sorted(p for p in union if cluster_of(p[0]) == cid)
        if cluster_pairs:
            body = "\n".join(f"{a} --> {b}" for a, b in cluster_pairs)
            response = f"Within this set the requires pairs are:\n{body}\n"
        else:
            response = "No requires pairs found in this set.\n"
        entries.append(
            {
                "prompt_sha256": prompt_sha256(build_prompt([(rid, texts[rid]) for rid in members])),
                "response_text": response,
            }
        )
    (OUT / "llm_fixtures.json").write_text(
        json.dumps(entries, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


# --- notely: synthetic note-taking app corpus ---

# id, period, text
NOTELY_REQUIREMENTS = [
    ("n1", "2024-06", "Add dark mode theme for the editor"),
    ("n2", "2024-06", "Sync notes across devices through a cloud account"),
    ("n3", "2024-06", "Search notes by title and content"),
    ("n4", "2024-06", "Export a note as a PDF file"),
    ("n5", "2024-07", "Organize notes with tags and folders"),
    ("n6", "2024-07", "Support markdown formatting in the editor"),
    ("n7", "2024-07", "Automatic backup of notes to cloud storage"),
    ("n8", "2024-07", "Pin favorite notes to the top of the list"),
    ("n9", "2024-07", "Add checklists with checkboxes inside notes"),
    ("n10", "2024-07", "Restore deleted notes from the trash"),
    ("n11", "2024-08", "Share a note with another user by link"),
    ("n12", "2024-08", "Attach images to a note"),
    ("n13", "2024-08", "Lock private notes with a passcode"),
    ("n14", "2024-08", "Sort the note list by date or title"),
    ("n15", "2024-08", "Add reminders with notifications to notes"),
]

# id, date, rating, embedding group, text. The 2024-06 instance admits
# reviews 2022-05-01..2024-05-31, the 2024-07 one 2022-06-01..2024-06-30.
NOTELY_REVIEWS = [
    ("m01", "2022-02-10", 5, 3, "Loved this app from day one. Simple and clean editor."),
    ("m02", "2022-05-15", 4, 0, "Please add a dark mode theme. The white editor hurts my eyes at night."),
    ("m03", "2023-07-02", 2, 1, "Sync keeps failing between my phone and tablet. Cloud account setup was confusing."),
    ("m04", "2023-07-18", 1, 1, "The app crashed and I lost my notes. A cloud backup option is badly needed."),
    ("m05", "2023-08-03", 4, 2, "Search works well for titles. Would be great if search also looked inside note content."),
    ("m06", "2023-08-21", 3, 2, "I need folders or tags to organize hundreds of notes. The flat list is a mess."),
    ("m07", "2023-09-05", 5, 3, "Markdown support would be awesome. I love formatting my notes as plain text."),
    ("m08", "2023-09-19", 2, 0, "The bright theme is annoying in the dark. Missing a night mode."),
    ("m09", "2023-10-07", 4, 4, "Exporting a note as PDF is my top feature request. Please add it."),
    ("m10", "2023-10-26", 1, 5, "I deleted a note by mistake and there is no trash to restore it from. Horrible."),
    ("m11", "2023-11-08", 3, 3, "Checklists with checkboxes would make shopping lists so much easier."),
    ("m12", "2023-11-24", 5, 2, "Great app for quick notes. Search is fast and reliable."),
    ("m13", "2023-12-09", 2, 1, "Sync between devices is slow and sometimes notes disappear. Very frustrating."),
    ("m14", "2024-01-04", 4, 0, "Please let me pin favorite notes to the top of the list."),
    ("m15", "2024-01-22", 3, 4, "The share option is missing. I want to send a note to a friend by link."),
    ("m16", "2024-02-06", 2, 3, "Images cannot be attached to notes. Every other editor supports this."),
    ("m17", "2024-02-20", 5, 3, "The editor is simple and smooth. Wonderful for daily journaling."),
    ("m18", "2024-03-05", 1, 5, "App froze and wiped a note. Useless without an automatic backup."),
    ("m19", "2024-03-28", 4, 5, "I wish I could lock private notes with a passcode."),
    ("m20", "2024-04-10", 3, 0, "Sorting the note list by date would be handy. Right now the order seems random."),
    ("m21", "2024-04-29", 4, 5, "Reminders with notifications for notes would be a great addition."),
    ("m22", "2024-05-20", 5, 2, "Hoping for tags to organize work and personal notes soon. The app is excellent otherwise."),
    ("m23", "2024-06-05", 2, 1, "Still no automatic backup to cloud storage. My notes feel unsafe."),
    ("m24", "2024-06-12", 4, 3, "Markdown formatting in the editor, please. Plain text is too limited."),
    ("m25", "2024-06-19", 3, 2, "Searching inside content now works better, but tags are still missing."),
    ("m26", "2024-06-25", 5, 0, "Dark mode is gorgeous. Thanks for listening to the reviews!"),
    ("m27", "2024-08-10", 4, 4, "Sharing notes by link works perfectly. Solid release."),
    ("m28", "2024-08-22", 2, 5, "The passcode lock is buggy and sometimes fails to open my own note."),
]

NOTELY_REQ_GROUPS = {
    "n1": 0, "n2": 1, "n3": 2, "n4": 4, "n5": 2, "n6": 3, "n7": 1, "n8": 0,
    "n9": 3, "n10": 5, "n11": 4, "n12": 3, "n13": 5, "n14": 0, "n15": 5,
}

EMBED_DIMS = 6


def embed_vector(group: int, index: int) -> list[float]:
    """A unit-ish vector near the group's basis axis, varied by item index."""
    v = [0.0] * EMBED_DIMS
    v[group] = 1.0
    v[(group + 1) % EMBED_DIMS] = round(0.1 * (index % 3), 4)
    v[(group + 2) % EMBED_DIMS] = round(0.05 * (index % 5), 4)
    return v


def write_notely() -> None:
    NOTELY_OUT.mkdir(parents=True, exist_ok=True)
    with (NOTELY_OUT / "requirements.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "text", "period", "app"])
        for rid, period, text in NOTELY_REQUIREMENTS:
            writer.writerow([rid, text, period, "notely"])
    with (NOTELY_OUT / "reviews.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "text", "timestamp", "app", "rating"])
        for mid, stamp, rating, _, text in NOTELY_REVIEWS:
            writer.writerow([mid, text, stamp, "notely", rating])

    header = ["id", *(f"dim{d}" for d in range(EMBED_DIMS))]
    with (NOTELY_OUT / "requirement_embeddings.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i, (rid, _, _) in enumerate(NOTELY_REQUIREMENTS):
            writer.writerow([rid, *embed_vector(NOTELY_REQ_GROUPS[rid], i)])
    with (NOTELY_OUT / "message_embeddings.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i, (mid, _, _, group, _) in enumerate(NOTELY_REVIEWS):
            writer.writerow([mid, *embed_vector(group, i)])

    with (NOTELY_OUT / "sentence_scores.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["message_id", "sentence_index", "polarity", "score", "intent"])
        writer.writerow(["m12", 0, "neg", 0.9, 0.0])
        writer.writerow(["m07", 1, "pos", 0.5, 1.0])
        writer.writerow(["m01", 7, "pos", 0.3, 0.0])


def main() -> None:
    check_design()
    OUT.mkdir(parents=True, exist_ok=True)
    write_benchmark()
    write_clusters()
    write_gold()
    write_llm_fixtures()
    write_notely()
    counts: dict[str, int] = {}
    for _, b in set(SHARED + BASELINE_ONLY) | set(SHARED + CLUSTER_ONLY):
        counts[b] = counts.get(b, 0) + 1
    print(f"wrote fixtures to {OUT} and {NOTELY_OUT}")
    print(f"rhs-count support: {len(counts)} requirements, max {max(counts.values())}")


if __name__ == "__main__":
    main()
