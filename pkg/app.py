import json
import logging
from collections.abc import Mapping

from flask import Flask, jsonify, request
from werkzeug.exceptions import HTTPException
from werkzeug.middleware.proxy_fix import ProxyFix
from werkzeug.utils import secure_filename

from errors import DomainError, ModelFormatError, XpgError
from explanation_service import xpg_service
from models import DecisionGraph, parse_model
from xpg_config import get_config

# Configure logging
logging.basicConfig(level=getattr(logging, get_config().log_level, logging.WARNING))

app = Flask(__name__)
app.wsgi_app = ProxyFix(app.wsgi_app, x_proto=1, x_host=1)

# Configuration
ALLOWED_EXTENSIONS = {'json'}
MAX_FILE_SIZE = 4 * 1024 * 1024  # 4MB
app.config['MAX_CONTENT_LENGTH'] = MAX_FILE_SIZE


def allowed_file(filename):
    return '.' in filename and filename.rsplit('.', 1)[1].lower() in ALLOWED_EXTENSIONS


def request_payload():
    """JSON body, or multipart form fields plus an uploaded `model_file`"""
    if request.is_json:
        data = request.get_json(silent=True)
        if not isinstance(data, dict):
            raise ModelFormatError("request body must be a JSON object")
        return data
    data = {}
    for key, value in request.form.items():
        try:
            data[key] = json.loads(value)
        except json.JSONDecodeError:
            data[key] = value
    upload = request.files.get('model_file')
    if upload is not None and upload.filename:
        filename = secure_filename(upload.filename)
        if not allowed_file(filename):
            raise ModelFormatError("model file must be a .json document")
        logging.info(f"Model uploaded: {filename}")
        data['model'] = parse_model(upload.read())
    return data


def require(data, *keys):
    missing = [key for key in keys if data.get(key) is None]
    if missing:
        raise ModelFormatError(f"missing required fields: {', '.join(missing)}")
    # documents only; plain strings would be taken for server-side paths
    if 'model' in keys and not isinstance(data['model'], (Mapping, DecisionGraph)):
        raise ModelFormatError(f"'model' must be a JSON object, not {type(data['model']).__name__}")
    if 'decision_list' in keys and not isinstance(data['decision_list'], (Mapping, list)):
        raise ModelFormatError(
            f"'decision_list' must be a JSON object or array, not {type(data['decision_list']).__name__}")
    return [data[key] for key in keys]


@app.errorhandler(XpgError)
def handle_xpg_error(e):
    if e.http_status >= 500:
        logging.error(f"{type(e).__name__}: {e}")
    return jsonify({'success': False, 'error': str(e), 'type': type(e).__name__}), e.http_status


@app.errorhandler(HTTPException)
def handle_http_error(e):
    return jsonify({'success': False, 'error': e.description}), e.code


@app.errorhandler(Exception)
def handle_unexpected(e):
    logging.error(f"Unexpected error: {e}", exc_info=True)
    return jsonify({'success': False, 'error': 'Internal server error'}), 500


@app.route('/health')
def health():
    return jsonify({'status': 'ok', 'config': get_config().as_dict()}), 200


@app.route('/api/validate', methods=['POST'])
def validate_model():
    model, = require(request_payload(), 'model')
    report = xpg_service.validate(model)
    return jsonify({'success': report['ok'], **report}), 200 if report['ok'] else 422


@app.route('/api/classify', methods=['POST'])
def classify_instance():
    model, instance = require(request_payload(), 'model', 'instance')
    return jsonify({'success': True, **xpg_service.classify(model, instance)}), 200


@app.route('/api/explain', methods=['POST'])
def explain_instance():
    data = request_payload()
    model, instance = require(data, 'model', 'instance')
    limit = data.get('limit')
    budget = data.get('budget')
    try:
        limit = int(limit) if limit is not None else None
        budget = float(budget) if budget is not None else None
    except (TypeError, ValueError):
        raise DomainError("limit must be an integer and budget a number of seconds")
    result = xpg_service.explain(
        model, instance,
        mode=data.get('mode', 'enumerate'),
        seed_axp=data.get('seed_axp'),
        seed_cxp=data.get('seed_cxp'),
        order=data.get('order'),
        limit=limit,
        budget=budget,
        verify=bool(data.get('verify', False)),
        dimacs=bool(data.get('dimacs', False)),
    )
    return jsonify({'success': True, **result}), 200


@app.route('/api/membership', methods=['POST'])
def feature_membership():
    model, instance, feature = require(request_payload(), 'model', 'instance', 'feature')
    return jsonify({'success': True, **xpg_service.membership(model, instance, feature)}), 200


@app.route('/api/compile-dl', methods=['POST'])
def compile_decision_list():
    data = request_payload()
    decision_list, = require(data, 'decision_list')
    document = xpg_service.compile_dl(decision_list, order=data.get('order'))
    return jsonify({'success': True, 'model': document}), 200


if __name__ == '__main__':
    app.run(host='0.0.0.0', port=get_config().port, debug=True)
