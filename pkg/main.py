import logging

from flask import Flask

import config
from api_routes import decoder_bp


def create_app():
    app = Flask(__name__)
    app.config['JSON_SORT_KEYS'] = False
    app.register_blueprint(decoder_bp, url_prefix='/api')
    return app


app = create_app()

if __name__ == '__main__':
    config.configure_logging()
    logging.info(f"Serving on {config.API_HOST}:{config.API_PORT}")
    app.run(host=config.API_HOST, port=config.API_PORT)
