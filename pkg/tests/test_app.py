import io
import json

import pytest

from app import app


@pytest.fixture
def client():
    app.config['TESTING'] = True
    with app.test_client() as client:
        yield client


@pytest.fixture
def hardware_doc(data_dir):
    return json.loads((data_dir / "hardware_dt.json").read_text(encoding="utf-8"))


@pytest.fixture
def rgb_doc(data_dir):
    return json.loads((data_dir / "rgb_omdd.json").read_text(encoding="utf-8"))


def test_health(client):
    response = client.get('/health')
    assert response.status_code == 200
    body = response.get_json()
    assert body['status'] == 'ok'
    assert body['config']['sat_backend'] in ('dpll', 'pysat')


def test_validate(client, hardware_doc):
    response = client.post('/api/validate', json={'model': hardware_doc})
    assert response.status_code == 200
    assert response.get_json()['ok'] is True


def test_validate_rejects_overlap(client, hardware_doc):
    hardware_doc['edges'][1]['literal'] = {'values': ['N', 'Y']}
    response = client.post('/api/validate', json={'model': hardware_doc})
    assert response.status_code == 422
    assert response.get_json()['success'] is False


def test_classify(client, hardware_doc):
    response = client.post('/api/classify', json={'model': hardware_doc, 'instance': 'O,L,Y,P'})
    assert response.status_code == 200
    assert response.get_json()['prediction'] == 'T'


def test_explain_enumerate(client, hardware_doc):
    response = client.post('/api/explain', json={
        'model': hardware_doc, 'instance': ['O', 'L', 'Y', 'P'], 'verify': True, 'dimacs': True})
    assert response.status_code == 200
    body = response.get_json()
    assert body['complete'] is True
    assert body['verified'] is True
    assert body['solve_calls'] == 4
    assert sorted(r['features'] for r in body['records']) == [[1], [1, 4], [4]]
    assert body['dimacs'].startswith('p cnf 4 3')


def test_explain_with_named_instance(client, rgb_doc):
    response = client.post('/api/explain', json={
        'model': rgb_doc, 'instance': {'x1': 0, 'x2': 1, 'x3': 2}, 'mode': 'axp'})
    assert response.status_code == 200
    assert response.get_json()['records'][0]['features'] == [1]


def test_explain_bad_limit(client, hardware_doc):
    response = client.post('/api/explain', json={'model': hardware_doc, 'instance': 'O,L,Y,P', 'limit': 'many'})
    assert response.status_code == 422


def test_explain_unknown_mode(client, hardware_doc):
    response = client.post('/api/explain', json={'model': hardware_doc, 'instance': 'O,L,Y,P', 'mode': 'all'})
    assert response.status_code == 422
    assert response.get_json()['type'] == 'DomainError'


def test_tree_mode_on_a_graph(client, rgb_doc):
    response = client.post('/api/explain', json={'model': rgb_doc, 'instance': '0,1,2', 'mode': 'cxps-tree'})
    assert response.status_code == 422
    assert 'tree XpG required' in response.get_json()['error']


def test_membership(client, hardware_doc):
    response = client.post('/api/membership', json={
        'model': hardware_doc, 'instance': 'O,L,Y,P', 'feature': 'Student'})
    assert response.status_code == 200
    body = response.get_json()
    assert body['feature'] == 3
    assert body['in_axp'] is False


def test_model_upload(client, data_dir):
    data = {
        'model_file': (io.BytesIO((data_dir / "hardware_dt.json").read_bytes()), 'hardware.json'),
        'instance': 'O,L,Y,P',
        'feature': '4',
    }
    response = client.post('/api/membership', data=data, content_type='multipart/form-data')
    assert response.status_code == 200
    assert response.get_json()['in_cxp'] is True


def test_upload_must_be_json(client):
    data = {'model_file': (io.BytesIO(b'{}'), 'model.txt'), 'instance': 'O,L,Y,P'}
    response = client.post('/api/classify', data=data, content_type='multipart/form-data')
    assert response.status_code == 400


def test_compile_dl(client, data_dir):
    dl = json.loads((data_dir / "example_dl.json").read_text(encoding="utf-8"))
    response = client.post('/api/compile-dl', json={'decision_list': dl})
    assert response.status_code == 200
    model = response.get_json()['model']
    assert len(model['nodes']) == 4
    classified = client.post('/api/classify', json={'model': model, 'instance': [1, 1]})
    assert classified.get_json()['prediction'] == 1


def test_missing_fields(client, hardware_doc):
    response = client.post('/api/classify', json={'model': hardware_doc})
    assert response.status_code == 400
    assert 'instance' in response.get_json()['error']


def test_model_paths_are_refused(client):
    response = client.post('/api/validate', json={'model': '/etc/passwd'})
    assert response.status_code == 400


def test_malformed_model(client):
    response = client.post('/api/validate', json={'model': {'features': []}})
    assert response.status_code == 400
    assert response.get_json()['type'] == 'ModelFormatError'


def test_unknown_route(client):
    response = client.get('/api/nothing')
    assert response.status_code == 404
    assert response.get_json()['success'] is False


@pytest.mark.parametrize('model', [[1, 2], 7, 'data/hardware_dt.json'])
def test_model_must_be_an_object(client, model):
    response = client.post('/api/explain', json={'model': model, 'instance': 'O,L,Y,P'})
    assert response.status_code == 400
    assert "'model' must be a JSON object" in response.get_json()['error']


def test_decision_list_must_be_a_document(client):
    response = client.post('/api/compile-dl', json={'decision_list': 3})
    assert response.status_code == 400


def test_upload_that_is_not_utf8(client):
    data = {'model_file': (io.BytesIO(b'\xff\xfe{\x00\xff'), 'model.json'), 'instance': 'O,L,Y,P'}
    response = client.post('/api/classify', data=data, content_type='multipart/form-data')
    assert response.status_code == 400
    assert response.get_json()['type'] == 'ModelFormatError'
