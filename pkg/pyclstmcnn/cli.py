"""Command line entry point.

Commands: synth, embed, stats, train, cv, sweep, predict. Settings are
resolved as flags > config file (--config, .json or .cfg) > built-in
defaults. All randomness flows from --data-seed (corpus generation and
embedding tables), --init-seed (parameter and skip-gram initialization)
and --shuffle-seed (fold partition, minibatch order and dropout).

Every command writes manifest.json next to its outputs; on failure the
outputs written so far are removed and the exit code is 1.

Intended to be used within a Python 3 environment.

"""

import argparse
import json
import logging
import sys

from dataclasses import asdict, fields

import numpy as np
import pandas as pd

from . import data_tools as dt
from . import embeddings_tools as et
from . import filesystem_tools as ft
from . import model_tools as mo
from . import strings_tools as st
from . import training_tools as tr
from .databases_tools import save_dataframe_safely
from .fofe_tools import FofeConfig


logger = logging.getLogger(__name__)

SEED_KEYS = ('data_seed', 'init_seed', 'shuffle_seed')
DEFAULT_SWEEP_GRID = [round(0.1 * i, 1) for i in range(1, 11)]

MODEL_FLAGS = {'embed_dim': int, 'lstm_hidden': int, 'conv_features': int,
               'fofe_dense_out': int, 'dropout_rate': float,
               'alpha_sent': float, 'alpha_cont': float}
TRAIN_FLAGS = {'epochs': int, 'batch_size': int, 'learning_rate': float,
               'beta1': float, 'beta2': float, 'eps': float, 'folds': int,
               'workers': int}
SYNTH_FLAGS = {'num_documents': int, 'sentences_per_document': int,
               'sentence_length': int, 'vocab_size': int, 'num_classes': int,
               'signal_position': int, 'noise_rate': float,
               'distractors': int, 'focus_index': int}


def parse_number_list(text, kind=float):
    """Comma separated numbers, e.g. '2,3,4'."""
    return [kind(item) for item in text.split(',') if item.strip()]


# Settings.

def default_settings():
    """Built-in defaults of every tunable value."""
    settings = {key: 0 for key in SEED_KEYS}
    model_defaults = mo.ModelConfig().to_dict()
    settings.update({k: model_defaults[k] for k in MODEL_FLAGS})
    settings['kernel_sizes'] = model_defaults['kernel_sizes']
    settings.update({k: getattr(tr.TrainConfig(), k) for k in TRAIN_FLAGS})
    synth_defaults = asdict(dt.SynthConfig())
    settings.update({k: synth_defaults[k] for k in SYNTH_FLAGS})
    return settings


def resolve_settings(args):
    """Merge defaults, config file values and explicit flags."""
    settings = default_settings()
    if args.config:
        from_file = ft.load_config_file(args.config)
        unknown = sorted(set(from_file) - set(settings))
        if unknown:
            raise ValueError('Unknown config keys: {}'.format(unknown))
        settings.update(from_file)
    for key in settings:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    if isinstance(settings['kernel_sizes'], str):
        settings['kernel_sizes'] = parse_number_list(settings['kernel_sizes'],
                                                     int)
    return settings


def make_model_config(settings, num_classes, embed_dim=None):
    """ModelConfig from resolved settings."""
    return mo.ModelConfig(
        embed_dim=embed_dim or settings['embed_dim'],
        lstm_hidden=settings['lstm_hidden'],
        kernel_sizes=tuple(settings['kernel_sizes']),
        conv_features=settings['conv_features'],
        fofe=FofeConfig(settings['alpha_sent'], settings['alpha_cont']),
        fofe_dense_out=settings['fofe_dense_out'],
        dropout_rate=settings['dropout_rate'],
        num_classes=num_classes, seed=settings['init_seed'])


def make_train_config(settings):
    """TrainConfig from resolved settings."""
    names = {f.name for f in fields(tr.TrainConfig)}
    values = {k: settings[k] for k in TRAIN_FLAGS if k in names}
    return tr.TrainConfig(shuffle_seed=settings['shuffle_seed'], **values)


def make_synth_config(settings):
    """SynthConfig from resolved settings."""
    return dt.SynthConfig(seed=settings['data_seed'],
                          **{k: settings[k] for k in SYNTH_FLAGS})


# Shared steps.

def load_dataset(args, settings):
    """Corpus, label names, instances and embedding table of a run."""
    documents, label_index = dt.load_corpus(args.corpus)
    if args.labels:
        label_index = dt.restrict_labels(label_index,
                                         args.labels.split(','))
    assert len(label_index) >= 2, \
        'Need at least 2 classes, corpus has {}'.format(len(label_index))
    instances = dt.build_instances(documents, label_index, args.regime)
    assert instances, 'Corpus yields no labelled instances'
    if args.embeddings:
        table = et.load_word2vec_text(args.embeddings,
                                      oov_seed=settings['data_seed'])
    else:
        vocab = (token for document in documents
                 for sentence in document.sentences
                 for token in sentence.tokens)
        table = et.random_table(vocab, settings['embed_dim'],
                                seed=settings['data_seed'])
    label_names = sorted(label_index, key=label_index.get)
    logger.info('%d instances over %d classes, embeddings of dimension %d',
                len(instances), len(label_names), table.dim)
    return documents, label_names, instances, table


def write_manifest(tracker, args, settings, **extra):
    """Record everything needed to reproduce a command's outputs."""
    manifest = {'command': args.command,
                'arguments': {k: v for k, v in vars(args).items()
                              if k not in ('func',)},
                'settings': settings,
                'seeds': {k: settings[k] for k in SEED_KEYS},
                'versions': ft.software_versions()}
    manifest.update(extra)
    return ft.write_json(manifest, tracker.path('manifest.json'))


# Commands.

def cmd_synth(args, settings, tracker):
    """Generate a synthetic corpus with its label sidecar."""
    synth_config = make_synth_config(settings)
    documents = dt.generate_synthetic(synth_config)
    corpus_path = dt.save_corpus(documents, tracker.path('corpus.jsonl'))
    label_index = {}
    for document in documents:
        for sentence in document.sentences:
            if sentence.label is not None:
                label_index.setdefault(sentence.label, len(label_index))
    ft.write_json(label_index, tracker.path('labels.json'))
    resampled = np.mean([d.meta['resampled'] for d in documents])
    logger.info('Wrote %d documents to %s', len(documents), corpus_path)
    write_manifest(tracker, args, settings,
                   synth_config=asdict(synth_config),
                   resampled_fraction=float(resampled),
                   statistics=dt.corpus_statistics(documents))


def cmd_stats(args, settings, tracker):
    """Print and store corpus statistics."""
    documents, label_index = dt.load_corpus(args.corpus)
    if args.labels:
        label_index = dt.restrict_labels(label_index, args.labels.split(','))
    stats = dt.corpus_statistics(documents, label_index)
    ft.write_json(stats, tracker.path('stats.json'))
    print(json.dumps(stats, indent=2, sort_keys=True))
    write_manifest(tracker, args, settings)


def cmd_embed(args, settings, tracker):
    """Pre-train skip-gram vectors on a corpus."""
    documents, _ = dt.load_corpus(args.corpus)
    sentences = [s.tokens for d in documents for s in d.sentences if s.tokens]
    table = et.train_skipgram(sentences, dim=settings['embed_dim'],
                              window=args.window, negatives=args.negatives,
                              epochs=args.embed_epochs,
                              learning_rate=args.embed_lr,
                              seed=settings['init_seed'],
                              progress=args.progress)
    table.save_word2vec_text(tracker.path('embeddings.txt'))
    write_manifest(tracker, args, settings, vocabulary=len(table))


def cmd_train(args, settings, tracker):
    """Train one variant on the whole corpus and save a checkpoint."""
    _, label_names, instances, table = load_dataset(args, settings)
    model_config = make_model_config(settings, len(label_names), table.dim)
    train_config = make_train_config(settings)
    model = mo.build_model(args.variant, model_config, table, label_names,
                           args.regime)
    weights = tr.class_weights(tr.label_frequencies(
        [i.label for i in instances], len(label_names)))
    result = tr.train_fold(model, instances, train_config, weights,
                           args.progress)
    metrics = tr.evaluate(result.model, instances)
    mo.save_checkpoint(result.model, tracker.path('model.h5'))
    ft.write_json({name: pos for pos, name in enumerate(label_names)},
                  tracker.path('labels.json'))
    logger.info('Training accuracy %.4f', metrics['accuracy'])
    write_manifest(tracker, args, settings,
                   model_config=model_config.to_dict(),
                   train_config=asdict(train_config),
                   loss_history=result.loss_history,
                   train_seconds=result.train_seconds,
                   train_accuracy=metrics['accuracy'])


def cmd_cv(args, settings, tracker):
    """Cross validate several variants on identical folds."""
    _, label_names, instances, table = load_dataset(args, settings)
    model_config = make_model_config(settings, len(label_names), table.dim)
    train_config = make_train_config(settings)
    f1_columns = st.format_label_columns(label_names)

    rows, summaries, fold_accuracies = [], {}, {}
    for variant in args.variants.split(','):
        variant = mo.ModelVariant(variant.strip()).value
        reports, summary = tr.cross_validate(instances, variant, model_config,
                                             train_config, table, label_names,
                                             args.progress)
        summaries[variant] = summary
        fold_accuracies[variant] = [r.accuracy for r in reports]
        for report in reports:
            rows.append([variant, report.fold, report.accuracy] +
                        list(report.f1) + [report.train_seconds])
    columns = ['variant', 'fold', 'accuracy'] + f1_columns + ['train_seconds']
    save_dataframe_safely(pd.DataFrame(rows, columns=columns),
                          tracker.path('folds.csv'), overwrite=True)
    ft.write_json({'columns': columns, 'label_names': label_names,
                   'variants': summaries,
                   't_tests': tr.pairwise_t_tests(fold_accuracies)},
                  tracker.path('summary.json'))
    write_manifest(tracker, args, settings,
                   model_config=model_config.to_dict(),
                   train_config=asdict(train_config))


def cmd_sweep(args, settings, tracker):
    """Cross validated accuracy over a grid of forgetting factors."""
    grid = parse_number_list(args.grid) if args.grid else DEFAULT_SWEEP_GRID
    assert grid, 'Sweep grid should not be empty'
    _, label_names, instances, table = load_dataset(args, settings)
    train_config = make_train_config(settings)

    rows = []
    for value in grid:
        point = dict(settings, **{args.parameter: value})
        model_config = make_model_config(point, len(label_names), table.dim)
        _, summary = tr.cross_validate(instances, args.variant, model_config,
                                       train_config, table, label_names,
                                       args.progress)
        rows.append([value, summary['accuracy']['mean'],
                     summary['accuracy']['std']])
        logger.info('%s=%.2f accuracy %.4f', args.parameter, value, rows[-1][1])
    save_dataframe_safely(
        pd.DataFrame(rows, columns=['value', 'mean_accuracy', 'std_accuracy']),
        tracker.path('sweep.csv'), overwrite=True)
    write_manifest(tracker, args, settings, grid=grid,
                   train_config=asdict(train_config))


def cmd_predict(args, settings, tracker):
    """Label the corpus sentences with a trained checkpoint."""
    model = mo.load_checkpoint(args.checkpoint)
    documents, corpus_labels = dt.load_corpus(args.corpus)
    label_index = {name: pos for pos, name in enumerate(model.label_names)}
    unknown = sorted(set(corpus_labels) - set(label_index))
    if unknown and not args.skip_unknown_labels:
        raise ValueError('Corpus labels {} unknown to checkpoint {}'.format(
            unknown, args.checkpoint))
    regime = args.regime or model.regime
    if regime != model.regime:
        logger.warning('Checkpoint was trained on %s contexts, predicting '
                       'with %s contexts', model.regime, regime)
    instances = dt.build_instances(documents, label_index, regime)
    probabilities = mo.predict_proba(model, instances)

    output_path = tracker.path('predictions.jsonl')
    with open(output_path, 'w', encoding='utf-8') as file_out:
        for instance, probs in zip(instances, probabilities):
            record = {'doc_id': instance.doc_id, 'index': instance.index,
                      'label': model.label_names[instance.label],
                      'predicted': model.label_names[int(np.argmax(probs))],
                      'probabilities': dict(zip(model.label_names,
                                                probs.tolist()))}
            file_out.write(json.dumps(record, sort_keys=True) + '\n')
    write_manifest(tracker, args, settings, predictions=len(instances),
                   variant=model.variant.value, regime=regime)


# Parser.

def _add_flags(parser, flags):
    for key, kind in flags.items():
        parser.add_argument('--' + key.replace('_', '-'), dest=key, type=kind,
                            default=None)


def build_parser():
    """Argument parser with one sub-command per operation."""
    parser = argparse.ArgumentParser(
        prog='pyclstmcnn',
        description='Context-LSTM-CNN sentence classification experiments.')
    parser.add_argument('--verbose', action='store_true',
                        help='Log debug messages.')
    commands = parser.add_subparsers(dest='command', required=True)

    def command(name, func, help_text):
        sub = commands.add_parser(name, help=help_text)
        sub.set_defaults(func=func)
        sub.add_argument('--output', default='output',
                         help='Output folder.')
        sub.add_argument('--config', default=None,
                         help='JSON or CFG config file.')
        sub.add_argument('--progress', action='store_true',
                         help='Show progress bars.')
        _add_flags(sub, {key: int for key in SEED_KEYS})
        return sub

    def corpus_flags(sub, embeddings=True):
        sub.add_argument('--corpus', required=True, help='JSONL corpus.')
        sub.add_argument('--regime', choices=dt.REGIMES, default='adjacent',
                         help='Context construction.')
        sub.add_argument('--labels', default=None,
                         help='Comma separated classes to classify.')
        if embeddings:
            sub.add_argument('--embeddings', default=None,
                             help='word2vec text file; random if absent.')
        _add_flags(sub, MODEL_FLAGS)
        _add_flags(sub, TRAIN_FLAGS)
        sub.add_argument('--kernel-sizes', dest='kernel_sizes', default=None,
                         help='Comma separated kernel widths.')

    sub = command('synth', cmd_synth, 'Generate a synthetic corpus.')
    _add_flags(sub, SYNTH_FLAGS)

    sub = command('stats', cmd_stats, 'Corpus statistics.')
    sub.add_argument('--corpus', required=True, help='JSONL corpus.')
    sub.add_argument('--labels', default=None,
                     help='Comma separated classes to count.')

    sub = command('embed', cmd_embed, 'Train skip-gram embeddings.')
    sub.add_argument('--corpus', required=True, help='JSONL corpus.')
    _add_flags(sub, {'embed_dim': int})
    sub.add_argument('--window', type=int, default=5)
    sub.add_argument('--negatives', type=int, default=5)
    sub.add_argument('--embed-epochs', dest='embed_epochs', type=int,
                     default=5)
    sub.add_argument('--embed-lr', dest='embed_lr', type=float,
                     default=0.025)

    sub = command('train', cmd_train, 'Train one variant on a corpus.')
    corpus_flags(sub)
    sub.add_argument('--variant', default=mo.ModelVariant.C_LSTM_CNN.value,
                     choices=[v.value for v in mo.ModelVariant])

    sub = command('cv', cmd_cv, 'Cross validate variants.')
    corpus_flags(sub)
    sub.add_argument('--variants',
                     default=','.join(v.value for v in mo.ModelVariant),
                     help='Comma separated variants.')

    sub = command('sweep', cmd_sweep, 'Forgetting factor sweep.')
    corpus_flags(sub)
    sub.add_argument('--parameter', choices=('alpha_cont', 'alpha_sent'),
                     default='alpha_cont')
    sub.add_argument('--grid', default=None,
                     help='Comma separated values, default 0.1..1.0.')
    sub.add_argument('--variant', default=mo.ModelVariant.C_LSTM_CNN.value,
                     choices=[v.value for v in mo.ModelVariant])

    sub = command('predict', cmd_predict, 'Predict with a checkpoint.')
    sub.add_argument('--checkpoint', required=True, help='Model HDF5 file.')
    sub.add_argument('--corpus', required=True, help='JSONL corpus.')
    sub.add_argument('--regime', choices=dt.REGIMES, default=None,
                     help='Context construction, default from checkpoint.')
    sub.add_argument('--skip-unknown-labels', action='store_true',
                     help='Skip sentences with labels unknown to the model.')
    return parser


def main(argv=None):
    """Run a command; return 0 on success, 1 on failure."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    tracker = None
    try:
        settings = resolve_settings(args)
        tracker = ft.OutputTracker(args.output)
        args.func(args, settings, tracker)
    except Exception as error:
        logger.error('%s failed: %s', args.command, error)
        logger.debug('Traceback', exc_info=True)
        if tracker is not None:
            tracker.remove_partial()
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
