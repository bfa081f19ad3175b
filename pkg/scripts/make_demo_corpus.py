#!/usr/bin/env python3
"""Write a synthetic JSON-lines corpus for demo maps and the live
browsing-loop check. Topics sit at latent grid positions; every latent
axis owns a low/high term block mixed by the topic's coordinate."""

import argparse
import json

import numpy as np


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out", help="output .jsonl path")
    parser.add_argument("--docs", type=int, default=10_000)
    parser.add_argument("--topics", type=int, default=20)
    parser.add_argument("--tokens", type=int, default=400)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    latent_dim = 3
    terms_per_block = 5
    rng = np.random.default_rng([args.seed, 7001])

    side = int(np.ceil(args.topics ** (1.0 / latent_dim)))
    cells = np.array(
        np.meshgrid(*[np.arange(side)] * latent_dim, indexing="ij")
    ).reshape(latent_dim, -1).T
    chosen = cells[rng.choice(len(cells), size=args.topics, replace=False)]
    z = chosen + (rng.random(chosen.shape) - 0.5) * 0.3
    q, r = np.linalg.qr(rng.standard_normal((latent_dim, latent_dim)))
    z = z @ (q * np.sign(np.diag(r)))
    z -= z.min(axis=0)
    latents = z / z.max(axis=0)

    terms = np.array(
        [
            f"ax{axis}{side_}term{j}"
            for axis in range(latent_dim)
            for side_ in ("lo", "hi")
            for j in range(terms_per_block)
        ]
        + [f"common{j}" for j in range(20)]
    )
    n_content = 2 * latent_dim * terms_per_block

    with open(args.out, "w", encoding="utf-8") as fh:
        for i in range(args.docs):
            topic = i % args.topics
            zt = latents[topic]
            n = args.tokens
            axis = rng.integers(latent_dim, size=n)
            hi = (rng.random(n) < zt[axis]).astype(int)
            slot = rng.integers(terms_per_block, size=n)
            idx = (axis * 2 + hi) * terms_per_block + slot
            background = rng.random(n) < 0.05
            idx[background] = n_content + rng.integers(20, size=int(background.sum()))
            fh.write(
                json.dumps(
                    {
                        "id": f"doc{i:05d}",
                        "text": " ".join(terms[idx]),
                        "topic_label": f"topic{topic:02d}",
                    }
                )
                + "\n"
            )
    print(f"{args.docs} documents -> {args.out}")


if __name__ == "__main__":
    main()
