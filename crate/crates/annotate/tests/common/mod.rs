#![allow(dead_code)]

use kasus_annotate::{Filler, ItemPool};
use kasus_core::genset::{build_dataset, Dataset, Template};
use kasus_core::lexicon::{Animacy, DeterminerClass, Lexeme, Lexicon};
use kasus_core::metrics::FillerKind;

pub fn dataset(templates: usize) -> Dataset {
    let lexicon = Lexicon::new((0..templates * 3).map(|i| {
        let noun = format!("Nomen{i}");
        let inanimate = i % 3 == 2;
        Lexeme::new(
            format!("n{i}"),
            &noun,
            &noun,
            &noun,
            if inanimate {
                DeterminerClass::Indefinite
            } else {
                DeterminerClass::Definite
            },
            if inanimate {
                Animacy::Inanimate
            } else {
                Animacy::Human
            },
        )
    }))
    .unwrap();
    let ts: Vec<Template> = (0..templates)
        .map(|t| {
            let items = [
                format!("n{}", 3 * t),
                format!("n{}", 3 * t + 1),
                format!("n{}", 3 * t + 2),
            ];
            Template::new(
                format!("t{t}"),
                "Er sagte, dass",
                "gibt",
                [&items[0], &items[1], &items[2]],
            )
        })
        .collect();
    build_dataset(&ts, &lexicon).unwrap()
}

pub fn fillers(per_kind: usize) -> Vec<Filler> {
    (0..per_kind)
        .flat_map(|i| {
            [
                Filler {
                    id: format!("fa{i}"),
                    text: format!("Das ist gut {i}."),
                    kind: FillerKind::Acceptable,
                },
                Filler {
                    id: format!("fv{i}"),
                    text: format!("Das sind gut {i}."),
                    kind: FillerKind::Violation,
                },
            ]
        })
        .collect()
}

pub fn pool(templates: usize) -> ItemPool {
    ItemPool::new(&dataset(templates), fillers(30)).unwrap()
}
