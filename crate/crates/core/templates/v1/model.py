try:
    from {MODEL_MODULE} import {MODEL_CLASS} as __Model
except ImportError:
    from {FALLBACK_MODULE} import {FALLBACK_CLASS} as __Model
__model = __Model({HYPERPARAMS})
__model.fit(__feature_train, __target_train)
__y_pred = np.asarray(__model.predict(__feature_test))
if __y_pred.ndim == 2 and __y_pred.shape[1] == 1:
    __y_pred = __y_pred[:, 0]
