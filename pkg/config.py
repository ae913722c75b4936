"""Validated run configuration and JSON input schemas"""

import logging
from typing import Dict, Literal, Optional

import jsonschema
from pydantic import BaseModel, Field, model_validator

from semigroup_core import (
    DEFAULT_CLOSURE_CAP,
    DEFAULT_LIMIT_DEPTH,
    FAMILIES,
    FamilySpec,
    InverseSemigroup,
    PartialBijection,
    generate_closure,
)

logger = logging.getLogger(__name__)

FINITE_INPUT_SCHEMA = {
    'type': 'object',
    'required': ['degree', 'generators'],
    'properties': {
        'degree': {'type': 'integer', 'minimum': 1},
        'generators': {
            'type': 'array',
            'minItems': 1,
            'items': {
                'type': 'object',
                'required': ['pairs'],
                'properties': {
                    'pairs': {
                        'type': 'array',
                        'items': {
                            'type': 'array',
                            'items': {'type': 'integer', 'minimum': 1},
                            'minItems': 2,
                            'maxItems': 2,
                        },
                    },
                },
            },
        },
        'cap': {'type': 'integer', 'minimum': 1},
    },
}

FAMILY_INPUT_SCHEMA = {
    'type': 'object',
    'required': ['family'],
    'properties': {
        'family': {'enum': list(FAMILIES)},
        'params': {
            'type': 'object',
            'properties': {'n': {'type': 'integer', 'minimum': 2, 'maximum': 9}},
        },
        'truncation': {'type': 'integer', 'minimum': 1},
    },
}


class AnalysisConfig(BaseModel):
    """One command run; exactly one of family / input names the carrier"""
    family: Optional[Literal['chain_with_symmetry', 'pure_chain', 'bicyclic', 'polycyclic']] = None
    input: Optional[str] = None
    n: int = Field(default=2, ge=2, le=9)
    truncation: int = Field(default=10, ge=1)
    basis_budget: int = Field(default=50, ge=1)
    format: Literal['json', 'text'] = 'json'
    seed: int = 0
    kill_zero: bool = False
    limit_depth: int = Field(default=DEFAULT_LIMIT_DEPTH, ge=1)
    output_dir: Optional[str] = None

    @model_validator(mode='after')
    def _one_source(self) -> 'AnalysisConfig':
        if (self.family is None) == (self.input is None):
            raise ValueError('exactly one of family and input is required')
        return self

    @property
    def subject(self) -> str:
        if self.family is not None:
            return self.family if self.family != 'polycyclic' else f"polycyclic{self.n}"
        return self.input.replace('\\', '/').rsplit('/', 1)[-1].rsplit('.', 1)[0]

    def family_spec(self) -> FamilySpec:
        params = {'n': self.n} if self.family == 'polycyclic' else {}
        return FamilySpec(self.family, params, self.truncation)


def carrier_from_document(document: Dict, config: AnalysisConfig) -> InverseSemigroup:
    """Build a carrier from a parsed input file; raises jsonschema.ValidationError on bad shape"""
    if 'family' in document:
        jsonschema.validate(document, FAMILY_INPUT_SCHEMA)
        spec = FamilySpec(document['family'], document.get('params', {}),
                          document.get('truncation', config.truncation))
        logger.info(f"Family input {spec.family} at truncation {spec.truncation}")
        return spec.build(config.kill_zero, config.limit_depth)
    jsonschema.validate(document, FINITE_INPUT_SCHEMA)
    degree = document['degree']
    generators = [PartialBijection.from_pairs(degree, g['pairs']) for g in document['generators']]
    return generate_closure(generators, document.get('cap', DEFAULT_CLOSURE_CAP), config.kill_zero)


def document_truncation(document: Dict, config: AnalysisConfig) -> int:
    return document.get('truncation', config.truncation) if 'family' in document else config.truncation


def build_carrier(config: AnalysisConfig) -> InverseSemigroup:
    """Carrier for a --family run; file inputs go through carrier_from_document"""
    return config.family_spec().build(config.kill_zero, config.limit_depth)
