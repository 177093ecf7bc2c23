import logging

from app import app
from xpg_config import get_config

if __name__ == '__main__':
    config = get_config()
    logging.info(f"Starting xpg-explain on port {config.port} with settings {config.as_dict()}")
    app.run(host='0.0.0.0', port=config.port, debug=config.log_level == 'DEBUG')
