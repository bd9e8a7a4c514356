#!/usr/bin/env python3
"""Regenerates the synthetic test fixtures under tests/fixtures.

  forum/<type>_page<n>.html   two saved forum pages per type section
  posts_1000.jsonl            1,000 raw posts for the cleaning tests
  posts_1000.words            whitespace word count of those posts

Output is deterministic; rerunning rewrites identical files.
"""

import json
import pathlib
import random

TYPES = [a + b + c + d for a in "EI" for b in "NS" for c in "FT" for d in "PJ"]

OPENERS = [
    "I think", "Honestly,", "My friend says", "Lately I've noticed", "You're right that",
    "I can't believe", "We'll see if", "They'd never admit", "It's funny how", "I'm not sure",
    "Don't you think", "She's convinced", "He isn't sure", "Wouldn't it be nice if",
]
MIDDLES = [
    "the {t} in my office plans everything",
    "most {t}s I know love long walks",
    "being an {t} means overthinking (a lot)",
    "my sister, an {t}, won't stop debating",
    "people like us need quiet time...",
    "the test said I'm {t} but I doubt it",
    "arguments at 3am are the best!!",
    "coffee + books = a perfect evening",
    "we've all been there, right?",
    "the forum's new layout is weird",
    "I'd rather write than talk",
    "schedules make me feel safe; chaos doesn't",
]
CLOSERS = [
    "Anyone else?", "lol.", "Thoughts?", ":)", "Just my two cents.", "Seriously.",
    "Help!", "...", "Oh well.", "Ha, ha.", "", "#relatable",
]
ODD = ["café", "naïve", "★", "—", "“quoted”", "¿qué?", "\U0001F600"]


def sentence(rng, t):
    parts = [rng.choice(OPENERS), rng.choice(MIDDLES).format(t=rng.choice([t, t.lower(), rng.choice(TYPES)]))]
    if rng.random() < 0.3:
        parts.append(rng.choice(ODD))
    parts.append(rng.choice(CLOSERS))
    return " ".join(p for p in parts if p)


def post_body(rng, t, n_sentences):
    return " ".join(sentence(rng, t) for _ in range(n_sentences))


def html_escape(s):
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def forum_page(rng, t, page):
    posts = []
    for k in range(6):
        if k == 5 and page == 1:
            body = "Agreed, " + t + "."  # short; dropped by the length filter
        else:
            body = post_body(rng, t, rng.randint(2, 4))
        quote = ""
        if rng.random() < 0.3:
            quote = '<blockquote class="bbCodeBlock">Someone said: ' + html_escape(post_body(rng, t, 1)) + "</blockquote>"
        sig = '<div class="message-signature">-- sent from my phone</div>' if rng.random() < 0.3 else ""
        posts.append(
            '<article class="message">\n'
            '  <div class="message-body js-selectToQuote">' + quote + "<p>" + html_escape(body) + "</p></div>\n"
            "  " + sig + "\n"
            "</article>"
        )
    return (
        "<!DOCTYPE html>\n<html><head><title>" + t + " Forum - Page " + str(page) + "</title>"
        "<script>var x = '<div class=\"message-body\">';</script></head>\n<body>\n"
        + "\n".join(posts)
        + "\n</body></html>\n"
    )


def main():
    root = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"
    rng = random.Random(20191)
    forum = root / "forum"
    forum.mkdir(parents=True, exist_ok=True)
    for t in TYPES:
        for page in (1, 2):
            (forum / f"{t.lower()}_page{page}.html").write_text(forum_page(rng, t, page), encoding="utf-8")

    words = 0
    with open(root / "posts_1000.jsonl", "w", encoding="utf-8") as f:
        for i in range(1000):
            t = TYPES[i % 16]
            body = post_body(rng, t, rng.randint(1, 5))
            words += len(body.split(" "))
            line = {"type": t, "body": body, "idx": i // 16, "url": f"fixture://{t.lower()}/1"}
            f.write(json.dumps(line, ensure_ascii=False) + "\n")
    (root / "posts_1000.words").write_text(f"{words}\n", encoding="utf-8")


if __name__ == "__main__":
    main()
