import numpy as np
import pytest

from errors import CorpusReadError, EmptyCorpusError, TokenizeError
from models.corpus import (EOS_ID, PAD_ID, SOS_ID, UNK_ID, Vocabulary, build_vocab, detokenize,
                           load_corpus, open_corpus, prepare_corpus, split_tokens, tokenize,
                           vocab_sidecar_path, write_corpus)
from tests.conftest import TOY_SMILES


def _tokens(seq, vocab):
    return [vocab.token_of(i) for i in seq.tokens[1:-1]]


def test_tokenize_character_split():
    vocab = build_vocab(["CCO"])
    seq = tokenize("CCO", vocab)
    assert seq.tokens[0] == SOS_ID and seq.tokens[-1] == EOS_ID
    assert _tokens(seq, vocab) == ["C", "C", "O"]


def test_two_character_atoms_are_single_tokens():
    vocab = build_vocab(["CCl", "CBr", "[Si]"])
    assert _tokens(tokenize("CCl", vocab), vocab) == ["C", "Cl"]
    assert split_tokens("BrCC[C@@H](N)Cl") == ["Br", "C", "C", "[C@@H]", "(", "N", ")", "Cl"]


def test_ring_closure_and_wildcard_tokens():
    assert split_tokens("C%12CC%12") == ["C", "%12", "C", "C", "%12"]
    assert split_tokens("*C") == ["*", "C"]


def test_unbalanced_paren_is_tokenizable():
    assert split_tokens("C(") == ["C", "("]


@pytest.mark.parametrize("bad", ["C[NH", "CXC", "", "C%1"])
def test_rejected_strings(bad):
    with pytest.raises(TokenizeError):
        split_tokens(bad)


def test_unknown_tokens_map_to_unk():
    vocab = build_vocab(["CCO"])
    assert UNK_ID in tokenize("CCN", vocab).tokens


def test_vocab_sizes_and_determinism():
    assert len(build_vocab(["CCO"])) == 6
    assert len(build_vocab(["CCO", "CCN"])) == 7
    lines = list(TOY_SMILES)
    shuffled = list(reversed(lines))
    assert build_vocab(lines) == build_vocab(shuffled)


def test_build_vocab_without_usable_lines():
    with pytest.raises(EmptyCorpusError):
        build_vocab(["C[", "X"])


def test_detokenize_round_trip(toy_vocab):
    for smiles in TOY_SMILES:
        assert detokenize(tokenize(smiles, toy_vocab), toy_vocab) == smiles


def test_detokenize_stops_at_eos_and_skips_padding(toy_vocab):
    c = toy_vocab.id_of("C")
    o = toy_vocab.id_of("O")
    assert detokenize([SOS_ID, c, o, EOS_ID, c, PAD_ID], toy_vocab) == "CO"


def test_load_corpus_deduplicates(tmp_path):
    path = tmp_path / "dups.smi"
    path.write_text("CCO\nCCO\nCCN\n", encoding="utf-8")
    corpus = load_corpus(str(path), build_vocab(["CCO", "CCN"]), max_len=64)
    assert len(corpus) == 2
    assert corpus.report.accepted == 2
    assert corpus.report.duplicates == 1


def test_load_corpus_length_filter(tmp_path):
    path = tmp_path / "long.smi"
    path.write_text("C" * 500 + "\nCCO\n", encoding="utf-8")
    corpus = load_corpus(str(path), build_vocab(["CCO"]), max_len=64)
    assert corpus.report.length_filtered == 1
    assert corpus.smiles == ("CCO",)


def test_load_report_accounts_for_every_line(tmp_path):
    path = tmp_path / "mixed.smi"
    path.write_text("# comment\nCCO\nCCO\nC[N\nCCN\n" + "C" * 80 + "\n", encoding="utf-8")
    corpus = load_corpus(str(path), build_vocab(["CCO", "CCN"]), max_len=20)
    report = corpus.report
    assert report.lines == 5
    assert len(corpus) + report.duplicates + report.rejected + report.length_filtered == report.lines
    assert "accepted: 2" in report.as_lines()


def test_all_lines_rejected(tmp_path):
    path = tmp_path / "bad.smi"
    path.write_text("C[N\nXX\n", encoding="utf-8")
    with pytest.raises(EmptyCorpusError):
        load_corpus(str(path), build_vocab(["CCO"]), max_len=64)


def test_lines_outside_the_vocabulary_are_counted(tmp_path):
    path = tmp_path / "foreign.smi"
    path.write_text("CCO\nCCN\n", encoding="utf-8")
    corpus = load_corpus(str(path), build_vocab(["CCO"]), max_len=64)
    assert corpus.report.accepted == 2
    assert corpus.report.unknown_tokens == 1
    assert "unknown_tokens: 1" in corpus.report.as_lines()
    assert UNK_ID in corpus.sequences[1].tokens


def test_non_utf8_file_is_a_read_error(tmp_path):
    path = tmp_path / "latin1.smi"
    path.write_bytes(b"CCO\nC\xe9C\n")
    with pytest.raises(CorpusReadError, match="not UTF-8"):
        prepare_corpus(str(path), 64)


def test_missing_file_raises_io_error(tmp_path):
    with pytest.raises(FileNotFoundError):
        prepare_corpus(str(tmp_path / "nope.smi"), 64)


def test_prepare_write_and_reopen(corpus_file, tmp_path):
    corpus = prepare_corpus(str(corpus_file), 64)
    out = tmp_path / "clean" / "corpus.smi"
    write_corpus(corpus, str(out))

    assert Vocabulary.load(vocab_sidecar_path(str(out))) == corpus.vocab
    reopened = open_corpus(str(out), 64)
    assert reopened.smiles == corpus.smiles
    assert reopened.sequences == corpus.sequences


def test_batches_cover_corpus_once_and_pad(corpus_file, rng):
    corpus = prepare_corpus(str(corpus_file), 64)
    batches = list(corpus.batches(5, rng))
    seen = sorted(i for b in batches for i in b.indices)
    assert seen == list(range(len(corpus)))
    for batch in batches:
        assert batch.ids.shape == batch.mask.shape
        np.testing.assert_array_equal(batch.mask, batch.ids != PAD_ID)
        assert np.all(batch.ids[:, 0] == SOS_ID)


def test_batches_without_rng_keep_file_order(corpus_file):
    corpus = prepare_corpus(str(corpus_file), 64)
    first = next(corpus.batches(3))
    assert first.smiles == list(TOY_SMILES[:3])
