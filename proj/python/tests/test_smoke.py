import json

import numpy as np
import pytest

import brewvec


@pytest.fixture(scope="module")
def trained():
    dataset, clusters = brewvec.synthetic(clusters=3, beers_per=5, flavors_per=4, checkins_per=30, tags_per=2,
                                          noise=0.0, seed=3)
    model, nll = brewvec.train(dataset, dim=5, lr=0.01, batch=64, epochs=100, seed=1)
    return dataset, clusters, model, nll


def test_dataset_shapes(trained):
    dataset, clusters, _, _ = trained
    assert len(dataset.beers) == 15
    assert len(dataset.flavors) == 12
    assert dataset.pair_count == 15 * 30 * 2
    assert set(clusters) == set(dataset.beers)
    counts = dataset.count_matrix()
    assert counts.shape == (15, 12)
    assert (counts.sum(axis=1) == 60).all()


def test_training_and_queries(trained):
    _, clusters, model, nll = trained
    assert len(nll) == 100
    assert nll[-1] < nll[0]
    assert model.dim == 5
    assert model.beer_matrix.shape == (15, 5)

    beer = model.beers[0]
    similar = model.similar_beers(beer, n=3)
    assert len(similar) == 3
    assert all(clusters[b] == clusters[beer] for b, _ in similar)
    scores = [s for _, s in similar]
    assert scores == sorted(scores, reverse=True)

    dist = model.flavor_distribution(beer)
    assert abs(sum(dist) - 1.0) < 1e-12
    top_tag = model.describe_beer(beer)[0][0]
    assert top_tag == model.flavors[int(np.argmax(dist))]

    assert len(model.recommend([beer, model.beers[5]], n=4, aggregate="max")) == 4
    assert len(model.profile_search([(model.flavors[0], 0.5), (model.flavors[1], 0.5)], n=2)) == 2
    assert len(model.flavor_arithmetic(beer, minus=[model.flavors[0]], plus=[model.flavors[5]], n=3)) == 3
    assert model.project_flavors_2d().shape == (12, 2)


def test_save_load_round_trip(trained, tmp_path):
    _, _, model, _ = trained
    path = tmp_path / "model.b2v"
    model.save(path)
    loaded = brewvec.Model.load(path)
    assert loaded.beers == model.beers
    assert np.allclose(loaded.beer_matrix, model.beer_matrix, rtol=1e-6, atol=1e-7)
    loaded.save(tmp_path / "again.b2v")
    assert (tmp_path / "again.b2v").read_bytes() == path.read_bytes()


def test_errors(trained, tmp_path):
    _, _, model, _ = trained
    with pytest.raises(KeyError):
        model.similar_beers("no/such", n=3)
    with pytest.raises(ValueError, match="0.9"):
        model.profile_search([(model.flavors[0], 0.5), (model.flavors[1], 0.4)])
    with pytest.raises(ValueError):
        model.recommend([model.beers[0]], aggregate="median")
    with pytest.raises(OSError):
        brewvec.Model.load(tmp_path / "missing.b2v")
    bad = tmp_path / "bad.b2v"
    bad.write_bytes(b"XXXX" + b"\0" * 16)
    with pytest.raises(brewvec.FormatError, match="bad magic"):
        brewvec.Model.load(bad)


def test_load_checkins_and_pca(tmp_path):
    rows = [
        {"beer_id": "a/one", "flavors": ["hoppy", "citrus"], "rating": 4.0},
        {"beer_id": "a/two", "flavors": ["roasty"]},
        {"beer_id": "b/three", "flavors": ["hoppy"], "rating": 3.5},
        {"beer_id": "b/four", "flavors": ["citrus", "roasty"]},
    ]
    path = tmp_path / "checkins.jsonl"
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
    dataset = brewvec.load_checkins(str(path))
    assert dataset.beers == ["a/one", "a/two", "b/three", "b/four"]
    assert dataset.mean_ratings[0] == 4.0
    assert dataset.mean_ratings[1] is None
    assert brewvec.pca_beer_vectors(dataset, 2).shape == (4, 2)
    path.write_text('{"beer_id": "x"\n')
    with pytest.raises(ValueError, match="line 1"):
        brewvec.load_checkins(str(path))
