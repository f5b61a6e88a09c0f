"""
Models package
==============

Corpus and vocabulary, ket embedding, quantum autoencoder, decoder, objective,
the composed hybrid model and the run configuration.
"""
