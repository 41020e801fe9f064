base_response = {422: {"description": "Request validation error"}}
