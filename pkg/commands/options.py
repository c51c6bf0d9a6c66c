import functools
import json
import logging

import click


def _parse_set(ctx, param, values):
    overrides = {}
    for item in values:
        key, sep, value = item.partition('=')
        if not sep or not key.strip():
            raise click.BadParameter(f"expected KEY=VALUE, got '{item}'", ctx=ctx, param=param)
        overrides[key.strip().upper()] = value.strip()
    return overrides


def pipeline_options(f):
    """
    Add the global flags shared by every command

    The wrapped command receives `config_path`, `overrides` and `quiet`
    instead of the individual flags. Dedicated flags win over --set.
    """
    @click.option('--config', 'config_path', type=click.Path(dir_okay=False),
                  help='Key-value config file, or a manifest.json from an earlier run.')
    @click.option('--out', 'out_dir', type=click.Path(file_okay=False), help='Output directory (OUT_DIR).')
    @click.option('--seed', type=int, help='Seed for every random choice (SEED).')
    @click.option('--input', 'inputs', multiple=True, type=click.Path(dir_okay=False),
                  help='Run file; repeat for several runs (INPUT).')
    @click.option('--model', 'model_path', type=click.Path(dir_okay=False), help='Model JSON file (MODEL).')
    @click.option('--set', 'settings', multiple=True, callback=_parse_set, metavar='KEY=VALUE',
                  help='Override any config key; repeatable.')
    @click.option('--quiet', is_flag=True, help='Only warnings and errors; no JSON summary.')
    @functools.wraps(f)
    def wrapper(config_path, out_dir, seed, inputs, model_path, settings, quiet, **kwargs):
        overrides = dict(settings)
        if out_dir is not None:
            overrides['OUT_DIR'] = out_dir
        if seed is not None:
            overrides['SEED'] = seed
        if inputs:
            overrides['INPUT'] = ','.join(inputs)
        if model_path is not None:
            overrides['MODEL'] = model_path
        if quiet:
            logging.getLogger().setLevel(logging.WARNING)
        return f(config_path=config_path, overrides=overrides, quiet=quiet, **kwargs)
    return wrapper


def respond(result, quiet=False):
    """
    Echo a controller result as JSON and exit with its code

    Args:
        result: Result dictionary, or (dictionary, exit code) tuple
        quiet: Suppress the success summary
    """
    exit_code = 0
    if isinstance(result, tuple) and len(result) == 2:
        result, exit_code = result

    if exit_code:
        click.echo(json.dumps(result, indent=2, default=str), err=True)
    elif not quiet:
        click.echo(json.dumps(result, indent=2, default=str))
    click.get_current_context().exit(exit_code)
