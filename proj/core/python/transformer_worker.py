#!/usr/bin/env python3
# Copyright 2026 The Sentiscope Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""JSON-lines worker hosting a Hugging Face sequence classifier.

Protocol (one JSON object per line on stdin, one reply per line on stdout):
  {"op": "info"}                  -> {"max_tokens": int, "num_labels": int}
  {"op": "count", "text": str}    -> {"tokens": int}   (no special tokens)
  {"op": "classify", "text": str} -> {"probs": [float, ...]}
Failures reply {"error": str}. The worker exits when stdin closes.
"""

import argparse
import json
import sys


def load(model_id):
    import torch
    from transformers import AutoModelForSequenceClassification, AutoTokenizer

    tokenizer = AutoTokenizer.from_pretrained(model_id)
    model = AutoModelForSequenceClassification.from_pretrained(model_id)
    model.eval()
    max_tokens = min(
        int(getattr(tokenizer, "model_max_length", 512) or 512),
        int(getattr(model.config, "max_position_embeddings", 512) or 512),
    )
    return torch, tokenizer, model, max_tokens


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--model", required=True)
    args = parser.parse_args()

    try:
        torch, tokenizer, model, max_tokens = load(args.model)
        load_error = None
    except Exception as e:  # reported on the first request
        load_error = f"{type(e).__name__}: {e}"

    def reply(obj):
        sys.stdout.write(json.dumps(obj) + "\n")
        sys.stdout.flush()

    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError as e:
            reply({"error": f"bad request: {e}"})
            continue
        if load_error is not None:
            reply({"error": load_error})
            continue
        op = request.get("op")
        try:
            if op == "info":
                reply({"max_tokens": max_tokens,
                       "num_labels": int(model.config.num_labels)})
            elif op == "count":
                ids = tokenizer(request["text"], add_special_tokens=False)["input_ids"]
                reply({"tokens": len(ids)})
            elif op == "classify":
                inputs = tokenizer(request["text"], return_tensors="pt",
                                   truncation=True, max_length=max_tokens)
                with torch.no_grad():
                    logits = model(**inputs).logits[0]
                probs = torch.softmax(logits.double(), dim=-1).tolist()
                reply({"probs": probs})
            else:
                reply({"error": f"unknown op {op!r}"})
        except Exception as e:
            reply({"error": f"{type(e).__name__}: {e}"})


if __name__ == "__main__":
    main()
