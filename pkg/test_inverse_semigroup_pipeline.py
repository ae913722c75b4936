import json

import pytest

from inverse_semigroup_pipeline import EXIT_INPUT, EXIT_OK, EXIT_UNKNOWN, run
from semigroup_core import ChainFamily

I3_DOCUMENT = {
    'degree': 3,
    'generators': [
        {'pairs': [[1, 1], [2, 2]]},
        {'pairs': [[1, 2], [2, 1], [3, 3]]},
        {'pairs': [[1, 2], [2, 3], [3, 1]]},
    ],
}


def invoke(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr().out
    return code, out


def invoke_json(capsys, *argv):
    code, out = invoke(capsys, *argv)
    return code, json.loads(out)


def test_analyze_chain_with_symmetry(capsys):
    code, doc = invoke_json(capsys, 'analyze', '--family', 'chain_with_symmetry', '--truncation', '20')
    assert code == EXIT_OK
    report = doc['report']
    assert report['summary'] == 'not E-continuous; groupoid not Hausdorff'
    assert report['continuity']['discontinuous_at'] == 'S'
    witness = next(row for row in report['continuity']['elements'] if row['element'] == 'S')['witness']
    assert witness == {'kind': 'principal', 'e': '1'}
    assert report['hausdorff']['evidence_pair'] == [
        {'g': 'S', 'x': {'kind': 'principal', 'e': '1'}},
        {'g': '1', 'x': {'kind': 'principal', 'e': '1'}},
    ]


def test_analyze_bicyclic(capsys):
    code, doc = invoke_json(capsys, 'analyze', '--family', 'bicyclic', '--truncation', '20')
    assert code == EXIT_OK
    assert doc['report']['summary'] == 'E-continuous; Hausdorff'


def test_analyze_finite_input(capsys, tmp_path):
    path = tmp_path / 'i3.json'
    path.write_text(json.dumps(I3_DOCUMENT))
    code, doc = invoke_json(capsys, 'analyze', '--input', str(path))
    assert code == EXIT_OK
    assert doc['report']['element_count'] == 34
    assert doc['report']['summary'] == 'E-continuous; Hausdorff'


def test_analyze_unknown_exits_one(capsys, monkeypatch):
    monkeypatch.setattr(ChainFamily, 'lower_set_shape', lambda self, g: None)
    code, doc = invoke_json(capsys, 'analyze', '--family', 'pure_chain', '--truncation', '5')
    assert code == EXIT_UNKNOWN
    assert doc['report']['hausdorff']['verdict'] == 'unknown'


@pytest.mark.parametrize('base, classes', [('1', 2), ('e1', 1)])
def test_germs_on_chain(capsys, base, classes):
    code, doc = invoke_json(capsys, 'germs', '--family', 'chain_with_symmetry', '--character', base)
    assert code == EXIT_OK
    assert doc['report']['class_count'] == classes


def test_germ_composition_table(capsys):
    _, doc = invoke_json(capsys, 'germs', '--family', 'chain_with_symmetry', '--character', 'principal:1')
    table = {(row['left'], row['right']): row['product'] for row in doc['report']['composition_table']}
    assert table == {('1', '1'): '1', ('1', 'S'): 'S', ('S', '1'): 'S', ('S', 'S'): '1'}


def test_germ_composition_table_uses_every_left_factor(capsys):
    _, doc = invoke_json(capsys, 'germs', '--family', 'bicyclic', '--character', 'principal:(0,0)',
                         '--truncation', '3')
    table = {(row['left'], row['right']): row['product'] for row in doc['report']['composition_table']}
    assert table == {(f"({m},0)", '(0,0)'): f"({m},0)" for m in range(4)}


def test_germs_rejects_unknown_character(capsys):
    code, doc = invoke_json(capsys, 'germs', '--family', 'chain_with_symmetry', '--character', 'limit:inf')
    assert code == EXIT_INPUT
    assert doc['status'] == 'error'


def test_gram_pure_chain(capsys):
    code, doc = invoke_json(capsys, 'gram', '--family', 'pure_chain', '--elements', '1,e1,e2')
    assert code == EXIT_OK
    assert doc['report']['psd']['passed']
    assert all(entry['psd'] for entry in doc['report']['matrices'])
    assert doc['report']['independence']['inconclusive'] == 0


def test_gram_flags_discontinuous_attainment(capsys):
    code, doc = invoke_json(capsys, 'gram', '--family', 'chain_with_symmetry', '--elements', 'S,1')
    assert code == EXIT_OK
    assert doc['report']['attainment']['S,1'] == 'discontinuous'
    assert 'degeneration' in doc['report']['degeneration']


def test_gram_single_element(capsys):
    _, doc = invoke_json(capsys, 'gram', '--family', 'bicyclic', '--elements', '(1,0)', '--truncation', '3')
    for entry in doc['report']['matrices']:
        expected = 0 if entry['character'] == {'kind': 'principal', 'e': '(0,0)'} else 1
        assert entry['matrix'] == [[expected]]


def test_gram_rejects_unknown_element(capsys):
    code, doc = invoke_json(capsys, 'gram', '--family', 'pure_chain', '--elements', 'S')
    assert code == EXIT_INPUT
    assert doc['status'] == 'error'


@pytest.mark.parametrize('variant, splitting', [('A', 1), ('B', 0)])
def test_k0(capsys, variant, splitting):
    code, doc = invoke_json(capsys, 'k0', '--variant', variant, '--levels', '30')
    assert code == EXIT_OK
    report = doc['report']
    assert [row['rank'] for row in report['stages']] == [n + 2 for n in range(31)]
    assert all(len(inc['splitting_rows']) == splitting for inc in report['inclusions'])


def test_k0_rejects_zero_levels(capsys):
    code, doc = invoke_json(capsys, 'k0', '--levels', '0')
    assert code == EXIT_INPUT


def test_degeneration(capsys):
    code, doc = invoke_json(capsys, 'degeneration')
    assert code == EXIT_OK
    assert doc['report']['conclusion'] == 'module degenerates'


def test_degeneration_rejects_other_families(capsys):
    code, _ = invoke_json(capsys, 'degeneration', '--family', 'bicyclic')
    assert code == EXIT_INPUT


def test_check(capsys):
    code, doc = invoke_json(capsys, 'check', '--truncation', '3')
    assert code == EXIT_OK
    assert doc['report']['passed']


@pytest.mark.parametrize('argv', [
    ['analyze'],
    ['analyze', '--family', 'bicyclic', '--input', 'x.json'],
    ['analyze', '--family', 'bicyclic', '--truncation', '0'],
])
def test_invalid_configuration(capsys, argv):
    code, doc = invoke_json(capsys, *argv)
    assert code == EXIT_INPUT
    assert doc['status'] == 'error'


@pytest.mark.parametrize('content', ['{not json', json.dumps({'degree': 0, 'generators': []})])
def test_malformed_input_file(capsys, tmp_path, content):
    path = tmp_path / 'bad.json'
    path.write_text(content)
    code, doc = invoke_json(capsys, 'analyze', '--input', str(path))
    assert code == EXIT_INPUT


def test_missing_input_file(capsys, tmp_path):
    code, _ = invoke_json(capsys, 'analyze', '--input', str(tmp_path / 'absent.json'))
    assert code == EXIT_INPUT


@pytest.mark.parametrize('argv', [
    ['analyze', '--family', 'polycyclic', '--truncation', '3'],
    ['gram', '--family', 'bicyclic', '--elements', '(0,0),(1,0),(1,1)', '--seed', '5'],
    ['k0', '--variant', 'B', '--levels', '5'],
])
def test_output_is_deterministic(capsys, argv):
    _, first = invoke(capsys, *argv)
    _, second = invoke(capsys, *argv)
    assert first == second


def test_output_dir(capsys, tmp_path):
    code, out = invoke(capsys, 'k0', '--levels', '3', '--output-dir', str(tmp_path))
    assert code == EXIT_OK
    saved = tmp_path / 'k0_chain_with_symmetry.json'
    assert json.loads(saved.read_text()) == json.loads(out)


def test_text_format(capsys):
    code, out = invoke(capsys, 'analyze', '--family', 'pure_chain', '--truncation', '4', '--format', 'text')
    assert code == EXIT_OK
    assert 'summary: "E-continuous; Hausdorff"' in out
    assert 'element' in out.splitlines()[0]
