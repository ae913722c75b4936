import argparse
import asyncio
import json
import logging
import re
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import aiofiles
import jsonschema
import pandas as pd
import pydantic

from af_ktheory import VARIANTS, k0_colimit_description
from config import AnalysisConfig, build_carrier, carrier_from_document, document_truncation
from continuity import DISCONTINUOUS, UNKNOWN
from errors import InconclusiveError, ToolkitError, UsageError
from germ_groupoid import compose_germs, germs_over, hausdorff_verdict, source_range
from invariants import run_invariant_suite
from l2_modules import (
    InnerProductTable,
    degeneration_report,
    gram_psd_check,
    is_psd,
    linear_independence_probe,
    random_trials,
)
from semigroup_core import FAMILIES, InverseSemigroup
from spectrum import characters, parse_character

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
COMMANDS = ('analyze', 'germs', 'gram', 'k0', 'degeneration', 'check')
EXIT_OK, EXIT_UNKNOWN, EXIT_INPUT = 0, 1, 2
INDEPENDENCE_TRIALS = 10
# commas inside "(m,n)" belong to the name
ELEMENT_SEPARATOR = re.compile(r",(?![^()]*\))")


def configure_logging(verbose: bool = False, log_file: Optional[str] = None):
    """stderr handler plus an optional file handler; stdout stays clean for JSON"""
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )


def _flatten(value, prefix: str = '') -> List[Tuple[str, str]]:
    if isinstance(value, dict):
        rows = []
        for key in sorted(value):
            rows.extend(_flatten(value[key], f"{prefix}.{key}" if prefix else str(key)))
        return rows
    if isinstance(value, list) and value and all(isinstance(v, (dict, list)) for v in value):
        rows = []
        for i, item in enumerate(value):
            rows.extend(_flatten(item, f"{prefix}[{i}]"))
        return rows
    return [(prefix, json.dumps(value, sort_keys=True))]


def render_text(command: str, report: Dict) -> str:
    """Diff-friendly rendering of the JSON report"""
    blocks = []
    if command == 'analyze' and 'continuity' in report:
        frame = pd.DataFrame([
            {'element': row['element'], 'verdict': row['verdict']}
            for row in report['continuity']['elements']
        ])
        blocks.append(frame.to_string(index=False))
    if command == 'gram' and 'matrices' in report:
        for entry in report['matrices']:
            frame = pd.DataFrame(entry['matrix'], index=report['elements'], columns=report['elements'])
            label = json.dumps(entry['character'], sort_keys=True)
            blocks.append(f"character {label}\n{frame.to_string()}")
    if command == 'k0':
        frame = pd.DataFrame(report['stages'])
        blocks.append(frame.to_string(index=False))
    blocks.append('\n'.join(f"{key}: {value}" for key, value in _flatten(report)))
    return '\n\n'.join(blocks) + '\n'


class AnalysisPipeline:
    """Runs one command per call and keeps counters across calls"""

    def __init__(self, output_dir: Optional[str] = None):
        self.processed_count = 0
        self.error_count = 0
        self.unknown_count = 0
        self.output_dir = Path(output_dir) if output_dir else None
        if self.output_dir is not None:
            self.output_dir.mkdir(parents=True, exist_ok=True)

    async def load_carrier(self, config: AnalysisConfig) -> Tuple[InverseSemigroup, int]:
        if config.input is None:
            carrier = build_carrier(config)
            logger.info(f"Built {carrier.label} at truncation {config.truncation}")
            return carrier, config.truncation
        logger.info(f"Reading input file: {config.input}")
        async with aiofiles.open(config.input, 'r', encoding='utf-8') as f:
            content = await f.read()
        document = json.loads(content)
        carrier = carrier_from_document(document, config)
        return carrier, document_truncation(document, config)

    async def analyze(self, config: AnalysisConfig) -> Tuple[Dict, bool]:
        carrier, truncation = await self.load_carrier(config)
        idempotents = carrier.idempotents(truncation)
        covers = {}
        for e in idempotents:
            above = [f for f in idempotents if f != e and carrier.natural_leq(e, f)]
            covers[e.name] = [f.name for f in above
                              if not any(h != f and carrier.natural_leq(h, f) for h in above)]
        chars = characters(carrier, truncation)
        hausdorff = hausdorff_verdict(carrier, truncation, config.basis_budget)
        continuity = hausdorff.continuity
        if continuity.status == DISCONTINUOUS:
            summary = 'not E-continuous; groupoid not Hausdorff'
        elif continuity.status == UNKNOWN:
            summary = 'undecided at this truncation'
        else:
            summary = 'E-continuous; Hausdorff'
        report = {
            'carrier': carrier.describe(),
            'truncation': truncation,
            'element_count': len(carrier.elements(truncation)),
            'idempotents': [e.name for e in idempotents],
            'order_covers': covers,
            'characters': {'count': len(chars), 'items': [x.to_json() for x in chars]},
            'continuity': continuity.to_json(),
            'hausdorff': hausdorff.to_json(),
            'summary': summary,
        }
        return report, continuity.status == UNKNOWN

    async def germs(self, config: AnalysisConfig, character: str) -> Tuple[Dict, bool]:
        carrier, truncation = await self.load_carrier(config)
        x = parse_character(carrier, character)
        fiber = germs_over(x, truncation)
        ranges = [source_range(germ)[1] for germ in fiber]
        isotropy = [germ for germ, landing in zip(fiber, ranges) if landing == x]
        table = []
        # any germ over x composes with a germ landing back on x
        for a in fiber:
            for b in isotropy:
                product = compose_germs(a, b, truncation)
                table.append({
                    'left': a.g.name, 'right': b.g.name,
                    'product': product.g.name if product is not None else None,
                })
        report = {
            'carrier': carrier.label,
            'truncation': truncation,
            'character': x.to_json(),
            'class_count': len(fiber),
            'classes': [
                {'germ': germ.to_json(), 'range': landing.to_json() if landing is not None else None}
                for germ, landing in zip(fiber, ranges)
            ],
            'composition_table': table,
        }
        return report, False

    async def gram(self, config: AnalysisConfig, names: Sequence[str]) -> Tuple[Dict, bool]:
        carrier, truncation = await self.load_carrier(config)
        elements = [carrier.parse(name) for name in names]
        if not elements:
            raise UsageError("--elements names no element")
        chars = characters(carrier, truncation)
        table = InnerProductTable(elements, truncation, config.basis_budget)
        attainments = table.attainments()
        matrices = []
        for x in chars:
            matrix = table.at(x)
            matrices.append({
                'character': x.to_json(),
                'matrix': [[int(v) for v in row] for row in matrix.tolist()],
                'psd': is_psd(matrix),
            })
        psd = gram_psd_check(elements, chars, truncation, config.basis_budget)
        trials = random_trials(INDEPENDENCE_TRIALS, len(elements), config.seed)
        distinct = len(set(elements)) == len(elements)
        report = {
            'carrier': carrier.label,
            'truncation': truncation,
            'elements': [g.name for g in elements],
            'attainment': attainments,
            'matrices': matrices,
            'psd': {'passed': psd['passed'], 'violations': psd['violations']},
            'independence': (linear_independence_probe(elements, trials, chars, truncation, config.basis_budget)
                             if distinct else None),
        }
        if DISCONTINUOUS in attainments.values():
            report['degeneration'] = 'discontinuous attainment; run the degeneration command for the trace'
            logger.warning("Gram entries with discontinuous attainment present")
        return report, UNKNOWN in attainments.values()

    async def k0(self, variant: str, levels: int) -> Tuple[Dict, bool]:
        return k0_colimit_description(variant, levels), False

    async def degeneration(self, config: AnalysisConfig) -> Tuple[Dict, bool]:
        carrier, truncation = await self.load_carrier(config)
        return degeneration_report(carrier, truncation, config.basis_budget), False

    async def check(self, config: AnalysisConfig) -> Tuple[Dict, bool]:
        return run_invariant_suite(config), False

    async def process(self, command: str, config: AnalysisConfig, args: argparse.Namespace) -> Tuple[Dict, int]:
        """Run one command; errors become a status document and exit code 2"""
        try:
            if command == 'analyze':
                report, unknown = await self.analyze(config)
            elif command == 'germs':
                report, unknown = await self.germs(config, args.character)
            elif command == 'gram':
                names = [n for n in ELEMENT_SEPARATOR.split(args.elements) if n.strip()]
                report, unknown = await self.gram(config, names)
            elif command == 'k0':
                report, unknown = await self.k0(args.variant, args.levels)
            elif command == 'degeneration':
                report, unknown = await self.degeneration(config)
            else:
                report, unknown = await self.check(config)
        except InconclusiveError as e:
            self.unknown_count += 1
            logger.warning(f"Inconclusive {command}: {e}")
            return {'status': 'inconclusive', 'command': command, 'error': str(e)}, EXIT_UNKNOWN
        except (ToolkitError, jsonschema.ValidationError, json.JSONDecodeError, OSError) as e:
            self.error_count += 1
            logger.error(f"Error processing {command}: {e}")
            return {'status': 'error', 'command': command, 'error': str(e)}, EXIT_INPUT

        self.processed_count += 1
        if unknown:
            self.unknown_count += 1
        document = {'status': 'success', 'command': command, 'report': report}
        if self.output_dir is not None:
            await self._save_result(command, config.subject, document)
        logger.info(f"Finished {command} for {config.subject}")
        return document, EXIT_UNKNOWN if unknown else EXIT_OK

    async def _save_result(self, command: str, subject: str, document: Dict):
        filename = self.output_dir / f"{command}_{subject}.json"
        async with aiofiles.open(filename, 'w') as f:
            await f.write(json.dumps(document, indent=2, sort_keys=True) + '\n')
        logger.info(f"Saved result to {filename}")

    def get_statistics(self) -> Dict:
        return {
            'processed': self.processed_count,
            'errors': self.error_count,
            'unknown': self.unknown_count,
        }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='Inverse semigroup E-continuity and germ groupoid toolkit')
    sub = parser.add_subparsers(dest='command', required=True)
    for command in COMMANDS:
        p = sub.add_parser(command)
        p.add_argument('--family', choices=FAMILIES, help='Built-in family')
        p.add_argument('--input', help='JSON file with generators or a family spec')
        p.add_argument('--n', type=int, default=2, help='Polycyclic alphabet size')
        p.add_argument('--truncation', type=int, default=10)
        p.add_argument('--basis-budget', type=int, default=50)
        p.add_argument('--format', choices=('json', 'text'), default='json')
        p.add_argument('--seed', type=int, default=0)
        p.add_argument('--kill-zero', action='store_true', help='Drop the filter containing the zero')
        p.add_argument('--limit-depth', type=int, default=3, help='Length bound for polycyclic limit codes')
        p.add_argument('--output-dir', help='Also write <command>_<subject>.json here')
        p.add_argument('--log-file')
        p.add_argument('--verbose', action='store_true')
        if command == 'germs':
            p.add_argument('--character', required=True, help="e.g. 'e1', 'principal:1', 'limit:inf'")
        if command == 'gram':
            p.add_argument('--elements', required=True, help='Comma separated element names')
        if command == 'k0':
            p.add_argument('--variant', choices=VARIANTS, default='A')
            p.add_argument('--levels', type=int, default=30)
    return parser


def _config_from_args(command: str, args: argparse.Namespace) -> AnalysisConfig:
    family = args.family
    if family is None and args.input is None and command in ('k0', 'degeneration', 'check'):
        family = 'chain_with_symmetry'
    return AnalysisConfig(
        family=family,
        input=args.input,
        n=args.n,
        truncation=args.truncation,
        basis_budget=args.basis_budget,
        format=args.format,
        seed=args.seed,
        kill_zero=args.kill_zero,
        limit_depth=args.limit_depth,
        output_dir=args.output_dir,
    )


def _emit(document: Dict, command: str, fmt: str):
    if fmt == 'text' and document.get('status') == 'success':
        sys.stdout.write(render_text(command, document['report']))
    else:
        sys.stdout.write(json.dumps(document, indent=2, sort_keys=True) + '\n')


async def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point with CLI support"""
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.log_file)
    try:
        config = _config_from_args(args.command, args)
    except pydantic.ValidationError as e:
        logger.error(f"Invalid configuration: {e}")
        _emit({'status': 'error', 'command': args.command, 'error': str(e)}, args.command, 'json')
        return EXIT_INPUT

    pipeline = AnalysisPipeline(config.output_dir)
    document, code = await pipeline.process(args.command, config, args)
    _emit(document, args.command, config.format)
    logger.info(f"Statistics: {pipeline.get_statistics()}")
    return code


def run(argv: Optional[Sequence[str]] = None) -> int:
    return asyncio.run(main(argv))


if __name__ == "__main__":
    sys.exit(run())
