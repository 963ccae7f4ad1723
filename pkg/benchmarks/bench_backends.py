"""Benchmark: compiled scanner core vs pure-Python fallback.

Times raw scanning, full lexing (scan + payload decode), and end-to-end
fine-grained scoring on synthetic documents of several sizes.

    python benchmarks/bench_backends.py [--sizes 1000,10000,100000] [--repeat 5]
"""

import argparse
import json
import random
import time

from schemascore import _pylex, compile_schema, lex
from schemascore.lexer import _materialize
from schemascore.reward import fine_grained_score

try:
    from schemascore import _speedups
except ImportError:
    _speedups = None


def make_document(rng, target_bytes):
    """A realistic nested document of roughly target_bytes length."""
    words = ["alpha", "beta", "gamma", "payload", "escape\\nheavy", "路径", "x" * 24]
    doc = {}
    i = 0
    while len(json.dumps(doc)) < target_bytes:
        key = f"field_{i}"
        roll = rng.random()
        if roll < 0.4:
            doc[key] = rng.choice(words) + str(rng.randrange(1000))
        elif roll < 0.6:
            doc[key] = [rng.randrange(10**6) / 7.0 for _ in range(8)]
        elif roll < 0.8:
            doc[key] = {"nested": {"deep": rng.choice(words), "n": i}}
        else:
            doc[key] = rng.random() < 0.5
        i += 1
    return json.dumps(doc, ensure_ascii=False)


def best_of(repeat, fn, *args):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="1000,10000,100000")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if _speedups is None:
        print("compiled scanner not built; run: python setup.py build_ext --inplace")
        return

    rng = random.Random(1)
    schema = compile_schema({"type": "object"})
    print(f"{'doc bytes':>10} {'stage':<18} {'pure':>12} {'compiled':>12} {'speedup':>8}")
    for size in sizes:
        text = make_document(rng, size)
        data = text.encode("utf-8")

        t_pure = best_of(args.repeat, lambda: _pylex.scan(data, False))
        t_comp = best_of(args.repeat, lambda: _speedups.scan(data, False))
        print(f"{len(data):>10} {'scan':<18} {t_pure * 1e3:>10.3f}ms {t_comp * 1e3:>10.3f}ms {t_pure / t_comp:>7.1f}x")

        def lex_with(scanner):
            return [_materialize(data, rec, False) for rec in scanner(data, False)]

        t_pure = best_of(args.repeat, lex_with, _pylex.scan)
        t_comp = best_of(args.repeat, lex_with, _speedups.scan)
        print(f"{len(data):>10} {'lex+decode':<18} {t_pure * 1e3:>10.3f}ms {t_comp * 1e3:>10.3f}ms {t_pure / t_comp:>7.1f}x")

        import schemascore.lexer as lexer_mod

        def score_with(scanner):
            previous = lexer_mod._scan
            lexer_mod._scan = scanner
            try:
                return fine_grained_score(text, schema)
            finally:
                lexer_mod._scan = previous

        t_pure = best_of(args.repeat, score_with, _pylex.scan)
        t_comp = best_of(args.repeat, score_with, _speedups.scan)
        print(f"{len(data):>10} {'fine_grained_score':<18} {t_pure * 1e3:>10.3f}ms {t_comp * 1e3:>10.3f}ms {t_pure / t_comp:>7.1f}x")


if __name__ == "__main__":
    main()
