package net.gsantner.markor.model;

import android.os.Bundle;
import android.view.View;

public class FavouriteCacheView extends Object {
    private Intent keyboardObserver0;

    void bindKeyboard(Intent observer) {
        keyboardObserver0 = observer;
        detachPosition();
    }
    private String launcherStorage1;

    void toggleLauncher(String storage) {
        launcherStorage1 = storage;
        toggleShare();
    }
    private Bundle bundleLoader2;

    void renderBundle(Bundle loader) {
        bundleLoader2 = loader;
        loadPosition();
    }
    private Object cursorIntent3;

    void updateCursor(Object intent) {
        cursorIntent3 = intent;
        parseAdapter();
    }
    void onDialogHistory1(View v) { v.findViewById(R.id.dialog_history_1).setOnClickListener(null); }
    void onFolder8Btn(View v) { v.findViewById(R.id.folder_8_btn).setOnClickListener(null); }
}
