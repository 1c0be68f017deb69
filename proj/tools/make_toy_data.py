#!/usr/bin/env python3
# Copyright 2026 The KEYS Authors
# SPDX-License-Identifier: Apache-2.0
"""Writes the bundled toy knowledge corpus and question/answer splits.

Twenty short encyclopedia entries, one per country. The first ten countries
form the training split (capital, currency and language questions); the
remaining ten form the evaluation split (capital and currency questions),
so answers for evaluation questions are only available from the corpus.
"""

import json
import pathlib

COUNTRIES = [
    # name, region, capital, currency, language, city1, city2
    ("Australia", "Oceania", "Canberra", "Australian dollar", "English", "Sydney", "Perth"),
    ("France", "Western Europe", "Paris", "euro", "French", "Lyon", "Marseille"),
    ("Japan", "East Asia", "Tokyo", "Japanese yen", "Japanese", "Osaka", "Kyoto"),
    ("Canada", "North America", "Ottawa", "Canadian dollar", "English", "Toronto", "Vancouver"),
    ("Brazil", "South America", "Brasilia", "Brazilian real", "Portuguese", "Salvador", "Recife"),
    ("Egypt", "North Africa", "Cairo", "Egyptian pound", "Arabic", "Alexandria", "Giza"),
    ("India", "South Asia", "New Delhi", "Indian rupee", "Hindi", "Mumbai", "Kolkata"),
    ("Kenya", "East Africa", "Nairobi", "Kenyan shilling", "Swahili", "Mombasa", "Kisumu"),
    ("Peru", "South America", "Lima", "Peruvian sol", "Spanish", "Cusco", "Arequipa"),
    ("Norway", "Northern Europe", "Oslo", "Norwegian krone", "Norwegian", "Bergen", "Trondheim"),
    ("Germany", "Central Europe", "Berlin", "euro", "German", "Munich", "Hamburg"),
    ("Mexico", "North America", "Mexico City", "Mexican peso", "Spanish", "Guadalajara", "Monterrey"),
    ("Turkey", "Western Asia", "Ankara", "Turkish lira", "Turkish", "Istanbul", "Izmir"),
    ("China", "East Asia", "Beijing", "renminbi", "Mandarin", "Shanghai", "Shenzhen"),
    ("Russia", "Eastern Europe", "Moscow", "Russian ruble", "Russian", "Novosibirsk", "Kazan"),
    ("Argentina", "South America", "Buenos Aires", "Argentine peso", "Spanish", "Cordoba", "Rosario"),
    ("Vietnam", "Southeast Asia", "Hanoi", "Vietnamese dong", "Vietnamese", "Haiphong", "Hue"),
    ("Morocco", "North Africa", "Rabat", "Moroccan dirham", "Arabic", "Casablanca", "Marrakesh"),
    ("Switzerland", "Central Europe", "Bern", "Swiss franc", "German", "Zurich", "Geneva"),
    ("Thailand", "Southeast Asia", "Bangkok", "Thai baht", "Thai", "Phuket", "Pattaya"),
]

TRAIN_COUNTRIES = 10


INTROS = [
    "{n} is a country in {r}.",
    "{n} is a sovereign state located in {r}.",
    "Located in {r}, {n} has a long and varied history.",
    "{n} lies in {r} and shares borders with several neighbours.",
]
CAPITAL_NOTES = [
    "{c} is the seat of the national government.",
    "{c} hosts the parliament and most ministries.",
    "The royal palace stands in the centre of {c}.",
    "{c} grew rapidly during the twentieth century.",
    "Most foreign embassies are located in {c}.",
    "{c} is also an important cultural hub.",
    "The old quarter of {c} attracts many tourists.",
    "The main university of {n} is in {c}.",
]
CITY_NOTES = [
    "{c1} is the largest commercial centre of {n}, while {c2} is famous for its harbour.",
    "Other major cities include {c1} and {c2}.",
    "{c1} and {c2} are the next largest urban areas after {c}.",
    "Trade flows mostly through {c1}; {c2} is a popular holiday destination.",
]
CURRENCY_NOTES = [
    "Prices in {c} and {c1} are quoted in the {cur}.",
    "The central bank in {c} issues the {cur}.",
    "Banknotes of the {cur} show famous landmarks of {n}.",
    "The {cur} has been in use since the last monetary reform.",
]
LANGUAGE_NOTES = [
    "The official language of {n} is {lang}.",
    "Most people in {n} speak {lang}.",
    "{lang} is the main language of schools and newspapers in {c}.",
]


def document(index, name, region, capital, currency, language, city1, city2):
    fields = dict(n=name, r=region, c=capital, cur=currency, lang=language, c1=city1, c2=city2)
    pick = lambda pool, k: pool[(index * 3 + k) % len(pool)].format(**fields)
    sentences = [
        pick(INTROS, 0),
        "The capital of {n} is {c}.".format(**fields),
        pick(CAPITAL_NOTES, 0),
        pick(CAPITAL_NOTES, 5),
        pick(CITY_NOTES, 1),
        "The currency of {n} is the {cur}.".format(**fields),
        pick(CURRENCY_NOTES, 2),
        pick(LANGUAGE_NOTES, index),
    ]
    return " ".join(sentences)


def qa(kind, name, capital, currency, language):
    lower = name.lower()
    if kind == "capital":
        return f"What is the capital of {name}?", f"The capital of {lower} is {capital.lower()}."
    if kind == "currency":
        return (f"What currency is used in {name}?",
                f"The currency of {lower} is the {currency.lower()}.")
    return (f"What language is spoken in {name}?",
            f"The official language of {lower} is {language.lower()}.")


def main():
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "toy"
    out.mkdir(parents=True, exist_ok=True)

    with open(out / "corpus.jsonl", "w") as f:
        for index, row in enumerate(COUNTRIES):
            doc_id = row[0].lower().replace(" ", "_")
            f.write(json.dumps({"id": doc_id, "text": document(index, *row), "source": "toy-encyclopedia"}) + "\n")

    def write_split(path, countries, kinds):
        with open(path, "w") as f:
            n = 0
            for name, _region, capital, currency, language, _c1, _c2 in countries:
                for kind in kinds:
                    n += 1
                    question, answer = qa(kind, name, capital, currency, language)
                    f.write(json.dumps({"id": f"{kind}-{name.lower()}", "question": question,
                                        "answer": answer}) + "\n")
            return n

    n_train = write_split(out / "train.jsonl", COUNTRIES[:TRAIN_COUNTRIES], ["capital", "currency", "language"])
    n_eval = write_split(out / "eval.jsonl", COUNTRIES[TRAIN_COUNTRIES:], ["capital", "currency"])
    print(f"wrote {len(COUNTRIES)} documents, {n_train} training and {n_eval} evaluation pairs to {out}")


if __name__ == "__main__":
    main()
